use std::f64::consts::PI;

use super::{check_length, merge_sorted, BoxSpec, Geometry, Spectrum, WallModel};
use crate::error::{Error, Result};

/// Default cap on the number of lattice modes `box_em_spectrum` will emit.
pub const DEFAULT_MODE_BUDGET: u64 = 20_000_000;

/// Electromagnetic cavity spectrum up to `omega_max`.
///
/// Conducting box: `ω = π·|(l/a, m/b1, n/b2)|` over nonnegative integers with
/// at least two nonzero; two polarizations when all three are nonzero, one
/// otherwise. Permeable piston: the odd-`l` half of the box of length `2a`,
/// i.e. `l/a` replaced by `(l + ½)/a`.
pub fn box_em_spectrum(spec: &BoxSpec, omega_max: f64) -> Result<Spectrum> {
    box_em_spectrum_with_budget(spec, omega_max, DEFAULT_MODE_BUDGET)
}

pub fn box_em_spectrum_with_budget(spec: &BoxSpec, omega_max: f64, budget: u64) -> Result<Spectrum> {
    check_length("omega_max", omega_max)?;
    let geometry = Geometry::Box(*spec);
    let estimated = geometry.tail().envelope(omega_max).ceil();
    if estimated > budget as f64 {
        return Err(Error::ResourceLimit {
            estimated: estimated.min(u64::MAX as f64) as u64,
            budget,
        });
    }

    let [a, b1, b2] = spec.sides();
    let k = omega_max / PI;
    let k2 = k * k;
    let (l_offset, l_counts_as_nonzero) = match spec.wall() {
        WallModel::AllConducting => (0.0, false),
        WallModel::PermeablePiston => (0.5, true),
    };

    let mut raw: Vec<(f64, u32)> = Vec::new();
    let l_max = (k * a - l_offset).floor().max(0.0) as u64;
    for l in 0..=l_max {
        let ql = (l as f64 + l_offset) / a;
        let rem_l = k2 - ql * ql;
        if rem_l < 0.0 {
            break;
        }
        let m_max = (rem_l.sqrt() * b1).floor() as u64;
        for m in 0..=m_max {
            let qm = m as f64 / b1;
            let rem_m = rem_l - qm * qm;
            if rem_m < 0.0 {
                break;
            }
            let n_max = (rem_m.sqrt() * b2).floor() as u64;
            for n in 0..=n_max {
                let qn = n as f64 / b2;
                let nonzero = u32::from(l_counts_as_nonzero || l > 0) + u32::from(m > 0) + u32::from(n > 0);
                if nonzero < 2 {
                    continue;
                }
                let omega = PI * (ql * ql + qm * qm + qn * qn).sqrt();
                if omega > omega_max {
                    continue;
                }
                raw.push((omega, if nonzero == 3 { 2 } else { 1 }));
            }
        }
    }
    let modes = merge_sorted(&mut raw, 0.0, 1e-12);
    Spectrum::new(geometry, modes, omega_max)
}
