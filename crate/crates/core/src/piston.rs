//! Piston forces: closed forms, numerical gradients of pipeline energies,
//! the Rayleigh–Dowker permeable-wall transform and the 3-D shaft assembly.
//!
//! Sign convention: a positive force pushes the piston towards larger `a`
//! (repulsive).

use std::f64::consts::PI;
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regular::{box_finite_part, Ladder, PipelineOptions};
use crate::spectra::{BoundaryCondition, BoxSpec, IntervalSpec, WallModel};

/// Catalan's constant.
pub const CATALAN: f64 = 0.915_965_594_177_219;

/// Relative step of the numerical gradient.
pub const DEFAULT_STEP_REL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Attractive,
    Repulsive,
    Null,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Attractive => "attractive",
            Classification::Repulsive => "repulsive",
            Classification::Null => "null",
        })
    }
}

pub fn classify(force: f64, null_epsilon: f64) -> Classification {
    if force.abs() <= null_epsilon {
        Classification::Null
    } else if force > 0.0 {
        Classification::Repulsive
    } else {
        Classification::Attractive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceMethod {
    Analytic,
    NumericGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceReport {
    pub force: f64,
    pub classification: Classification,
    pub method: ForceMethod,
    /// Closed-form value, when one is known.
    pub analytic: Option<f64>,
    /// `|analytic − numeric|` when both are available.
    pub cross_check_gap: Option<f64>,
    pub warnings: Vec<String>,
}

impl ForceReport {
    pub fn analytic(force: f64, null_epsilon: f64) -> Self {
        Self {
            force,
            classification: classify(force, null_epsilon),
            method: ForceMethod::Analytic,
            analytic: Some(force),
            cross_check_gap: None,
            warnings: Vec::new(),
        }
    }

    /// Attaches a closed-form reference to a numeric report.
    pub fn with_analytic(mut self, analytic: f64) -> Self {
        self.analytic = Some(analytic);
        if self.method == ForceMethod::NumericGradient {
            self.cross_check_gap = Some((analytic - self.force).abs());
        }
        self
    }

    /// `cross_check_gap / |analytic|`, or the absolute gap for a zero analytic value.
    pub fn relative_gap(&self) -> Option<f64> {
        let (gap, analytic) = (self.cross_check_gap?, self.analytic?);
        Some(if analytic == 0.0 { gap } else { gap / analytic.abs() })
    }
}

fn null_epsilon_for(a: f64) -> f64 {
    1e-12 / (a * a)
}

/// `−π/24a²` for like ends, `+π/48a²` for mixed ends.
pub fn force_analytic_interval(spec: &IntervalSpec) -> ForceReport {
    let a = spec.length();
    let force = if spec.is_mixed() {
        PI / (48.0 * a * a)
    } else {
        -PI / (24.0 * a * a)
    };
    ForceReport::analytic(force, null_epsilon_for(a))
}

/// Equal-length star: `(N−3)π/48a²` for Neumann pistons, `(3−2N)π/48a²` for
/// Dirichlet pistons.
pub fn force_analytic_star(edges: usize, a: f64, piston: BoundaryCondition) -> Result<ForceReport> {
    if edges == 0 {
        return Err(Error::invalid("a star needs at least one edge"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("edge length must be positive, got {a}")));
    }
    let n = edges as f64;
    let factor = match piston {
        BoundaryCondition::Neumann => n - 3.0,
        BoundaryCondition::Dirichlet => 3.0 - 2.0 * n,
    };
    Ok(ForceReport::analytic(factor * PI / (48.0 * a * a), null_epsilon_for(a)))
}

/// `−dE/da` by central differences at steps `h` and `h/2` combined with one
/// Richardson step, `(4D(h/2) − D(h))/3`. The four energy evaluations run
/// concurrently.
pub fn force_numeric<F>(energy: F, a: f64, h: f64, null_epsilon: f64) -> Result<ForceReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("piston position must be positive, got {a}")));
    }
    if !(h > 0.0 && h < a / 4.0) {
        return Err(Error::invalid(format!("step {h} must lie in (0, a/4)")));
    }
    let points = [a + h, a - h, a + h / 2.0, a - h / 2.0];
    let values: Vec<f64> = points.par_iter().map(|&x| energy(x)).collect::<Result<_>>()?;
    let coarse = -(values[0] - values[1]) / (2.0 * h);
    let fine = -(values[2] - values[3]) / h;
    let force = (4.0 * fine - coarse) / 3.0;
    Ok(ForceReport {
        force,
        classification: classify(force, null_epsilon),
        method: ForceMethod::NumericGradient,
        analytic: None,
        cross_check_gap: None,
        warnings: Vec::new(),
    })
}

/// Energy of the box whose piston face is infinitely permeable,
/// `Ē_a = E_{2a} − E_a`.
pub fn rayleigh_dowker<F>(conducting_energy: F, a: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(conducting_energy(2.0 * a)? - conducting_energy(a)?)
}

/// Force form of the transform: `−dĒ/da = 2F(2a) − F(a)`.
pub fn rayleigh_dowker_force<F>(conducting_force: F, a: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(2.0 * conducting_force(2.0 * a)? - conducting_force(a)?)
}

/// Exact factor `2^{−p} − 1` by which the transform multiplies an energy
/// homogeneous of degree `−p` in `a`.
pub fn rayleigh_dowker_bracket(power: u32) -> Ratio<i64> {
    Ratio::new(1, 1i64 << power) - 1
}

/// Lukosz parallel-plate pressure `−π²/240a⁴`.
pub fn pressure_lukosz(a: f64) -> f64 {
    -PI * PI / (240.0 * a.powi(4))
}

/// Boyer pressure `+(7/8)π²/240a⁴` inside a box with one permeable face,
/// valid for `a ≪ b`.
pub fn pressure_inside_permeable(a: f64) -> f64 {
    let bracket = rayleigh_dowker_bracket(3);
    (*bracket.numer() as f64 / *bracket.denom() as f64) * pressure_lukosz(a)
}

/// Long-shaft pressure `+G/24b⁴`, valid for a shaft much longer than `b`.
pub fn pressure_long_shaft(b: f64) -> f64 {
    CATALAN / (24.0 * b.powi(4))
}

/// Aspect ratio above which the thin-slab formula is no longer trusted.
pub const SLAB_REGIME_LIMIT: f64 = 0.2;

/// A permeable piston at distance `a` from a conducting end, in a square
/// shaft of side `b` and total length `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PistonAssembly3D {
    pub a: f64,
    pub b: f64,
    pub shaft_length: f64,
    pub inside_pressure: f64,
    pub outside_pressure: f64,
    pub net_force: f64,
    pub warnings: Vec<String>,
}

impl PistonAssembly3D {
    pub fn new(a: f64, b: f64, shaft_length: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("shaft length", shaft_length)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if shaft_length <= a {
            return Err(Error::invalid(format!(
                "shaft length {shaft_length} must exceed a = {a}"
            )));
        }
        let inside_pressure = pressure_inside_permeable(a);
        let outside_pressure = pressure_long_shaft(b);
        let mut warnings = Vec::new();
        if a / b > SLAB_REGIME_LIMIT {
            warnings.push(format!(
                "a/b = {} exceeds {SLAB_REGIME_LIMIT}; the interior pressure formula assumes a << b",
                a / b
            ));
        }
        if shaft_length - a < 10.0 * b {
            warnings.push(format!(
                "exterior length {} is not long compared with b = {b}",
                shaft_length - a
            ));
        }
        Ok(Self {
            a,
            b,
            shaft_length,
            inside_pressure,
            outside_pressure,
            net_force: b * b * (inside_pressure - outside_pressure),
            warnings,
        })
    }
}

/// `b²·(P_inside − P_shaft)`, with regime warnings attached.
pub fn net_piston_force_3d(assembly: &PistonAssembly3D) -> ForceReport {
    let mut report = ForceReport::analytic(assembly.net_force, 1e-12 * assembly.b.powi(-2));
    report.warnings = assembly.warnings.clone();
    report
}

/// Aspect ratio `a/b` at which the interior and shaft pressures balance,
/// found by bisection. This lies outside the regime of either formula.
pub fn crossover_aspect() -> f64 {
    let balance = |x: f64| pressure_inside_permeable(x) - pressure_long_shaft(1.0);
    let (mut lo, mut hi) = (1e-2f64, 1e2f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// `(7π²·24 / (1920 G))^{1/4}`.
pub fn crossover_aspect_closed_form() -> f64 {
    (7.0 * PI * PI * 24.0 / (1920.0 * CATALAN)).powf(0.25)
}

/// Numeric force on the `a` face of a box, `−∂E₀/∂a` at fixed `b1, b2`.
///
/// The cutoff ladder is pinned to the unperturbed box so that every stencil
/// point is fitted on the same window.
pub fn box_force_numeric(spec: &BoxSpec, options: &PipelineOptions) -> Result<ForceReport> {
    let mut pinned = options.clone();
    if pinned.ladder.is_none() {
        let len = spec.min_side();
        pinned.ladder = Some(Ladder::geometric(
            options.t0_fraction.unwrap_or(0.2) * len,
            options.rungs.unwrap_or(8),
        )?);
    }
    let a = spec.a();
    let energy = |x: f64| -> Result<f64> { Ok(box_finite_part(&spec.with_a(x)?, &pinned)?.finite_part()) };
    let [_, b1, b2] = spec.sides();
    force_numeric(energy, a, a * DEFAULT_STEP_REL, 1e-9 / (b1 * b2))
}

/// Outcome of the cube comparison for a permeable piston.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeVerdict {
    pub side: f64,
    /// `E(a,a,a)`.
    pub energy_cube: f64,
    /// `E(2a,a,a)`.
    pub energy_doubled: f64,
    pub energy_positive: bool,
    /// `|E(2a) − ½E(a)| < |E(2a) − E(a)|`.
    pub closer_to_half: bool,
    /// `Ē = E(2a) − E(a)`.
    pub permeable_energy: f64,
    /// Classification read off the sign of `Ē` alone, as if `Ē ∝ 1/a`
    /// (negative energy read as attraction).
    pub energy_sign_reading: Classification,
    /// Conducting interior force `−∂E/∂a` at the cube.
    pub conducting_force: ForceReport,
    /// `2F(2a) − F(a)`, cross-checked against the gradient of the permeable
    /// box energy.
    pub permeable_force: ForceReport,
    /// Permeable force minus the long-shaft pressure on the far side,
    /// `F̄ − a²·G/24a⁴`.
    pub net_with_shaft: f64,
    pub classification: Classification,
}

/// Sign of the permeable-piston force at the cubical point from the numeric
/// box pipeline.
pub fn cube_permeable_verdict(side: f64, options: &PipelineOptions) -> Result<CubeVerdict> {
    let cube = BoxSpec::conducting(side, side, side)?;
    let doubled = cube.with_a(2.0 * side)?;
    let (energies, forces) = rayon::join(
        || -> Result<(f64, f64)> {
            Ok((
                box_finite_part(&cube, options)?.finite_part(),
                box_finite_part(&doubled, options)?.finite_part(),
            ))
        },
        || -> Result<(ForceReport, ForceReport)> {
            Ok((
                box_force_numeric(&cube, options)?,
                box_force_numeric(&doubled, options)?,
            ))
        },
    );
    let (e1, e2) = energies?;
    let (f1, f2) = forces?;
    let permeable = 2.0 * f2.force - f1.force;
    let direct = box_force_numeric(&BoxSpec::new(side, side, side, WallModel::PermeablePiston)?, options)?;
    let epsilon = 1e-9 / (side * side);
    let permeable_energy = e2 - e1;
    let permeable_force = ForceReport {
        force: permeable,
        classification: classify(permeable, epsilon),
        method: ForceMethod::NumericGradient,
        analytic: None,
        cross_check_gap: Some((permeable - direct.force).abs()),
        warnings: Vec::new(),
    };
    Ok(CubeVerdict {
        side,
        energy_cube: e1,
        energy_doubled: e2,
        energy_positive: e1 > 0.0,
        closer_to_half: (e2 - 0.5 * e1).abs() < (e2 - e1).abs(),
        permeable_energy,
        energy_sign_reading: classify(permeable_energy, 0.0),
        conducting_force: f1,
        classification: permeable_force.classification,
        net_with_shaft: permeable - side * side * pressure_long_shaft(side),
        permeable_force,
    })
}

/// One row of the expected-sign table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTableEntry {
    pub scenario: String,
    pub parameters: String,
    pub expected: Classification,
}

/// Expected classifications for every scenario with a stated sign.
pub fn sign_table() -> Vec<SignTableEntry> {
    let row = |scenario: &str, parameters: String, expected| SignTableEntry {
        scenario: scenario.to_string(),
        parameters,
        expected,
    };
    let mut rows = vec![
        row("interval", "bc=DD".into(), Classification::Attractive),
        row("interval", "bc=NN".into(), Classification::Attractive),
        row("interval", "bc=DN".into(), Classification::Repulsive),
    ];
    for n in 1..=6 {
        let expected = match n {
            1 | 2 => Classification::Attractive,
            3 => Classification::Null,
            _ => Classification::Repulsive,
        };
        rows.push(row("star", format!("piston=N n={n}"), expected));
    }
    for n in 2..=6 {
        rows.push(row("star", format!("piston=D n={n}"), Classification::Attractive));
    }
    for aspect in ["0.05", "0.1", "0.2"] {
        rows.push(row("piston3d", format!("a/b={aspect}"), Classification::Repulsive));
    }
    rows.push(row("cube", "permeable".into(), Classification::Attractive));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::{Dirichlet as D, Neumann as N};

    #[test]
    fn interval_forces() {
        let f = |a, l, r| force_analytic_interval(&IntervalSpec::new(a, l, r).unwrap());
        let dd = f(1.0, D, D);
        assert!((dd.force + PI / 24.0).abs() < 1e-15);
        assert_eq!(dd.classification, Classification::Attractive);
        let dn = f(1.0, D, N);
        assert!((dn.force - 0.06545).abs() < 1e-5);
        assert_eq!(dn.classification, Classification::Repulsive);
        assert!((f(2.0, N, N).force + PI / 96.0).abs() < 1e-15);
    }

    #[test]
    fn star_forces() {
        let n3 = force_analytic_star(3, 1.0, N).unwrap();
        assert_eq!(n3.force, 0.0);
        assert_eq!(n3.classification, Classification::Null);
        let n5 = force_analytic_star(5, 1.0, N).unwrap();
        assert!((n5.force - PI / 24.0).abs() < 1e-15);
        assert_eq!(n5.classification, Classification::Repulsive);
        let d2 = force_analytic_star(2, 1.0, D).unwrap();
        assert!((d2.force + PI / 48.0).abs() < 1e-15);
        assert!(force_analytic_star(0, 1.0, N).is_err());
    }

    #[test]
    fn numeric_gradient_of_inverse_length() {
        let r = force_numeric(|a| Ok(-PI / (24.0 * a)), 1.0, 1e-3, 1e-12)
            .unwrap()
            .with_analytic(-PI / 24.0);
        assert!(r.cross_check_gap.unwrap() < 1e-8);
        assert_eq!(r.classification, Classification::Attractive);
        assert!(force_numeric(Ok, 1.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn numeric_gradient_propagates_errors() {
        let r = force_numeric(|_| Err(Error::invalid("nope")), 1.0, 1e-3, 0.0);
        assert!(r.is_err());
    }

    #[test]
    fn rayleigh_dowker_examples() {
        let dd = |a: f64| Ok(-PI / (24.0 * a));
        assert!((rayleigh_dowker(dd, 1.7).unwrap() - PI / (48.0 * 1.7)).abs() < 1e-15);
        let plate = |a: f64| Ok(0.3 / a.powi(3));
        assert!((rayleigh_dowker(plate, 1.0).unwrap() + 0.875 * 0.3).abs() < 1e-15);
        assert_eq!(rayleigh_dowker(|_| Ok(4.2), 3.0).unwrap(), 0.0);
        assert_eq!(rayleigh_dowker_bracket(1), Ratio::new(-1, 2));
        assert_eq!(rayleigh_dowker_bracket(3), Ratio::new(-7, 8));
    }

    #[test]
    fn pressures() {
        assert!((pressure_inside_permeable(1.0) - 7.0 * PI * PI / 1920.0).abs() < 1e-15);
        assert!((pressure_inside_permeable(1.0) - 0.035983).abs() < 1e-6);
        assert!((pressure_inside_permeable(2.0) * 16.0 - pressure_inside_permeable(1.0)).abs() < 1e-16);
        assert!((pressure_long_shaft(1.0) - 0.0381652).abs() < 1e-7);
        assert!((pressure_long_shaft(2.0) * 16.0 - pressure_long_shaft(1.0)).abs() < 1e-16);
        // the transform applied to the plate force reproduces the Boyer value
        let lukosz_force = |a: f64| Ok(pressure_lukosz(a));
        let via_force = rayleigh_dowker_force(lukosz_force, 1.3).unwrap();
        assert!((via_force - pressure_inside_permeable(1.3)).abs() < 1e-15);
    }

    #[test]
    fn assembly() {
        let a = PistonAssembly3D::new(0.1, 1.0, 100.0).unwrap();
        let r = net_piston_force_3d(&a);
        assert!((r.force - 359.79).abs() < 0.01, "{}", r.force);
        assert_eq!(r.classification, Classification::Repulsive);
        assert!(r.warnings.is_empty());
        let wide = PistonAssembly3D::new(0.5, 1.0, 100.0).unwrap();
        assert_eq!(wide.warnings.len(), 1);
        assert!(PistonAssembly3D::new(1.0, 1.0, 0.5).is_err());
        // b → 2b: inside term ×4, outside ×1/4
        let a2 = PistonAssembly3D::new(0.1, 2.0, 100.0).unwrap();
        let inside = |x: &PistonAssembly3D| x.b * x.b * x.inside_pressure;
        let outside = |x: &PistonAssembly3D| x.b * x.b * x.outside_pressure;
        assert!((inside(&a2) / inside(&a) - 4.0).abs() < 1e-12);
        assert!((outside(&a2) / outside(&a) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn crossover() {
        let x = crossover_aspect();
        assert!((x - crossover_aspect_closed_form()).abs() < 1e-12);
        let at = PistonAssembly3D::new(x, 1.0, 100.0).unwrap();
        assert!(at.net_force.abs() < 1e-12);
    }

    #[test]
    fn sign_table_serializes() {
        let rows = sign_table();
        let json = serde_json::to_string(&rows).unwrap();
        let back: Vec<SignTableEntry> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rows);
    }
}
