use std::f64::consts::PI;

use super::{check_length, Geometry, IntervalSpec, Mode, Spectrum};
use crate::error::Result;

/// Exact interval spectrum up to `omega_max`.
///
/// Like ends give `nπ/a` (`n >= 1` for DD, `n >= 0` for NN with the zero
/// mode flagged); mixed ends give `(2n+1)π/2a`.
pub fn interval_spectrum(spec: &IntervalSpec, omega_max: f64) -> Result<Spectrum> {
    check_length("omega_max", omega_max)?;
    let a = spec.length();
    let (offset, first) = if spec.is_mixed() {
        (0.5, 0u64)
    } else if spec.left() == super::BoundaryCondition::Neumann {
        (0.0, 0)
    } else {
        (0.0, 1)
    };
    let modes = (first..)
        .map(|n| (n as f64 + offset) * PI / a)
        .take_while(|&w| w <= omega_max)
        .map(|w| Mode::new(w, 1))
        .collect();
    Spectrum::new(Geometry::Interval(*spec), modes, omega_max)
}
