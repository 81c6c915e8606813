//! The acceptance matrix behind `paper-suite`.

use std::f64::consts::PI;

use num_rational::Ratio;
use pistonlab::piston::{
    box_force_numeric, cube_permeable_verdict, force_numeric, net_piston_force_3d, pressure_inside_permeable,
    pressure_long_shaft, pressure_lukosz, rayleigh_dowker, rayleigh_dowker_bracket, Classification, PistonAssembly3D,
    CATALAN, DEFAULT_STEP_REL,
};
use pistonlab::regular::{
    closed_form_energy_1d, interval_finite_part, regularized_energy, star_finite_part, DivergenceTemplate, Ladder,
    PipelineOptions, StarPipeline,
};
use pistonlab::spectra::{
    interval_spectrum, star_spectrum, BoundaryCondition, BoxSpec, IntervalSpec, Spectrum, StarGraphSpec,
};
use pistonlab::Result;
use rayon::prelude::*;
use serde::Serialize;

use crate::scenarios::null_epsilon_1d;
use BoundaryCondition::{Dirichlet as D, Neumann as N};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The published value or statement being reproduced.
    pub reference: String,
    pub expected: Option<f64>,
    pub measured: Option<f64>,
    pub discrepancy: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: String,
}

impl Check {
    fn relative(name: &str, reference: &str, expected: f64, measured: f64, tolerance: f64) -> Self {
        let discrepancy = (measured - expected).abs() / expected.abs();
        Self {
            name: name.into(),
            reference: reference.into(),
            expected: Some(expected),
            measured: Some(measured),
            discrepancy: Some(discrepancy),
            tolerance: Some(tolerance),
            pass: discrepancy <= tolerance,
            note: String::new(),
        }
    }

    fn absolute(name: &str, reference: &str, expected: f64, measured: f64, tolerance: f64) -> Self {
        let discrepancy = (measured - expected).abs();
        Self {
            discrepancy: Some(discrepancy),
            pass: discrepancy <= tolerance,
            ..Self::relative(name, reference, expected, measured, tolerance)
        }
    }

    fn claim(name: &str, reference: &str, measured: Option<f64>, pass: bool, note: String) -> Self {
        Self {
            name: name.into(),
            reference: reference.into(),
            expected: None,
            measured,
            discrepancy: None,
            tolerance: None,
            pass,
            note,
        }
    }

    fn and_class(mut self, got: Classification, want: Classification) -> Self {
        if got != want {
            self.pass = false;
            self.note = format!("classified {got}, expected {want}");
        }
        self
    }

    fn failed(name: &str, error: pistonlab::Error) -> Self {
        Self::claim(name, "-", None, false, error.to_string())
    }
}

type CheckFn = fn() -> Result<Check>;

fn interval_energy(l: BoundaryCondition, r: BoundaryCondition) -> impl Fn(f64) -> Result<f64> + Sync {
    move |a| Ok(interval_finite_part(&IntervalSpec::new(a, l, r)?, &PipelineOptions::default())?.finite_part())
}

fn star_energy(n: usize, piston: BoundaryCondition) -> impl Fn(f64) -> Result<f64> + Sync {
    move |a| {
        Ok(star_finite_part(
            &StarGraphSpec::equal(n, a, piston)?,
            &StarPipeline::default(),
            &PipelineOptions::default(),
        )?
        .finite_part())
    }
}

fn max_gap(got: &[f64], want: &[f64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    got.iter().zip(want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spectrum_check(name: &str, reference: &str, spectrum: Spectrum, want: &[f64]) -> Check {
    let got = spectrum.expanded();
    let gap = max_gap(&got, want);
    let mut check = Check::absolute(name, reference, 0.0, gap, 1e-12);
    check.expected = None;
    check.note = format!("{} modes", got.len());
    check
}

fn dd_modes() -> Result<Check> {
    let s = interval_spectrum(&IntervalSpec::new(1.0, D, D)?, 10.0)?;
    Ok(spectrum_check(
        "interval DD a=1 modes",
        "π, 2π, 3π",
        s,
        &[PI, 2.0 * PI, 3.0 * PI],
    ))
}

fn nn_modes() -> Result<Check> {
    let s = interval_spectrum(&IntervalSpec::new(1.0, N, N)?, 7.0)?;
    let zero = s.has_zero_mode();
    let mut check = spectrum_check("interval NN a=1 modes", "0, π, 2π", s, &[0.0, PI, 2.0 * PI]);
    check.pass &= zero;
    Ok(check)
}

fn dn_modes() -> Result<Check> {
    let s = interval_spectrum(&IntervalSpec::new(2.0, D, N)?, 3.0 * PI)?;
    let want: Vec<f64> = (0..6).map(|k| (2 * k + 1) as f64 * PI / 4.0).collect();
    Ok(spectrum_check("interval DN a=2 modes", "(2k+1)π/4", s, &want))
}

fn star_degeneracy() -> Result<Check> {
    let s = star_spectrum(&StarGraphSpec::equal(4, 1.0, N)?, 7.0)?;
    let got: Vec<(f64, u32)> = s.modes().iter().map(|m| (m.omega, m.multiplicity)).collect();
    let want = [(0.0, 1), (PI / 2.0, 3), (PI, 1), (1.5 * PI, 3), (2.0 * PI, 1)];
    let pass = got.len() == want.len()
        && got
            .iter()
            .zip(&want)
            .all(|((w, m), (w0, m0))| (w - w0).abs() < 1e-12 && m == m0)
        && s.has_zero_mode();
    Ok(Check::claim(
        "star N=4 degeneracy N-1",
        "(π/2,3), (π,1), (3π/2,3), (2π,1) + zero mode",
        None,
        pass,
        format!("{got:?}"),
    ))
}

fn multiset_gap(a: &Spectrum, b: &Spectrum) -> f64 {
    max_gap(&a.expanded(), &b.expanded())
}

fn star_reduction_one() -> Result<Check> {
    let star = star_spectrum(&StarGraphSpec::equal(1, 1.0, N)?, 60.0)?;
    let interval = interval_spectrum(&IntervalSpec::new(1.0, N, N)?, 60.0)?;
    let mut c = Check::absolute(
        "star N=1 reduces to interval a",
        "Neumann interval of length a",
        0.0,
        multiset_gap(&star, &interval),
        1e-12,
    );
    c.expected = None;
    Ok(c)
}

fn star_reduction_two() -> Result<Check> {
    let star = star_spectrum(&StarGraphSpec::equal(2, 1.0, N)?, 60.0)?;
    let interval = interval_spectrum(&IntervalSpec::new(2.0, N, N)?, 60.0)?;
    let mut c = Check::absolute(
        "star N=2 reduces to interval 2a",
        "Neumann interval of length 2a",
        0.0,
        multiset_gap(&star, &interval),
        1e-12,
    );
    c.expected = None;
    Ok(c)
}

fn dn_asymptotic() -> Result<Check> {
    let spec = IntervalSpec::new(1.0, D, N)?;
    let t = 0.01;
    let omega = pistonlab::regular::required_omega_max(&pistonlab::spectra::Geometry::Interval(spec).tail(), t, 1e-12);
    let e = regularized_energy(&interval_spectrum(&spec, omega)?, t)?.value;
    let two_term = 1.0 / (2.0 * PI * t * t) + PI / 48.0;
    Ok(Check::absolute(
        "DN E(t=0.01) two-term asymptotic",
        "a/2πt² + π/48a + O(t)",
        two_term,
        e,
        1e-3,
    ))
}

fn dn_finite_part() -> Result<Check> {
    let options = PipelineOptions {
        ladder: Some(Ladder::from_times(vec![0.2, 0.1, 0.05, 0.025, 0.0125])?),
        template: Some(DivergenceTemplate::with_weyl(1.0 / (2.0 * PI))?),
        ..PipelineOptions::default()
    };
    let fp = interval_finite_part(&IntervalSpec::new(1.0, D, N)?, &options)?.finite_part();
    Ok(Check::relative(
        "DN finite part, five-rung ladder",
        "+π/48a, Weyl term a/2πt² fixed",
        PI / 48.0,
        fp,
        1e-6,
    ))
}

fn star_finite_part_n4() -> Result<Check> {
    let fp = star_energy(4, N)(1.0)?;
    Ok(Check::relative(
        "star N=4 finite part",
        "(N-3)π/48a",
        PI / 48.0,
        fp,
        1e-6,
    ))
}

fn dn_closed_form() -> Result<Check> {
    let e = closed_form_energy_1d(&IntervalSpec::new(1.0, D, N)?);
    Ok(Check::relative("DN closed-form energy", "+π/48a", PI / 48.0, e, 1e-15))
}

fn interval_force(
    l: BoundaryCondition,
    r: BoundaryCondition,
    name: &str,
    reference: &str,
    want: f64,
    class: Classification,
) -> Result<Check> {
    let f = force_numeric(interval_energy(l, r), 1.0, DEFAULT_STEP_REL, null_epsilon_1d(1.0))?;
    Ok(Check::relative(name, reference, want, f.force, 1e-5).and_class(f.classification, class))
}

fn dd_force() -> Result<Check> {
    interval_force(
        D,
        D,
        "DD force a=1",
        "-π/24a², attractive",
        -PI / 24.0,
        Classification::Attractive,
    )
}

fn dn_force() -> Result<Check> {
    interval_force(
        D,
        N,
        "DN force a=1",
        "+π/48a², repulsive",
        PI / 48.0,
        Classification::Repulsive,
    )
}

fn star_force(n: usize, piston: BoundaryCondition) -> Result<(f64, Classification)> {
    let f = force_numeric(star_energy(n, piston), 1.0, DEFAULT_STEP_REL, null_epsilon_1d(1.0))?;
    Ok((f.force, f.classification))
}

fn star_force_null() -> Result<Check> {
    let (f, class) = star_force(3, N)?;
    Ok(
        Check::absolute("star N=3 force", "0, null", 0.0, f, null_epsilon_1d(1.0))
            .and_class(class, Classification::Null),
    )
}

fn star_force_n4() -> Result<Check> {
    let (f, class) = star_force(4, N)?;
    Ok(
        Check::relative("star N=4 force", "+π/48a², repulsive", PI / 48.0, f, 1e-5)
            .and_class(class, Classification::Repulsive),
    )
}

fn star_force_n5() -> Result<Check> {
    let (f, class) = star_force(5, N)?;
    Ok(
        Check::relative("star N=5 force", "+π/24a², repulsive", PI / 24.0, f, 1e-5)
            .and_class(class, Classification::Repulsive),
    )
}

fn dirichlet_star_attractive() -> Result<Check> {
    let forces = (2..=6).map(|n| star_force(n, D)).collect::<Result<Vec<_>>>()?;
    let pass = forces.iter().all(|(_, c)| *c == Classification::Attractive);
    let list: Vec<String> = forces.iter().map(|(f, _)| format!("{f:.6}")).collect();
    Ok(Check::claim(
        "Dirichlet star attractive, N=2..6",
        "attraction for all N>1",
        None,
        pass,
        format!("forces {}", list.join(", ")),
    ))
}

fn rayleigh_dowker_dd() -> Result<Check> {
    let e = rayleigh_dowker(interval_energy(D, D), 1.0)?;
    Ok(Check::relative(
        "transform of DD energy",
        "-π/24a·(1/2 - 1) = +π/48a",
        PI / 48.0,
        e,
        1e-6,
    ))
}

fn brackets() -> Result<Check> {
    let half = rayleigh_dowker_bracket(1) == Ratio::new(-1, 2);
    let seven_eighths = rayleigh_dowker_bracket(3) == Ratio::new(-7, 8);
    Ok(Check::claim(
        "transform brackets",
        "1/2 - 1 and 1/8 - 1 = -7/8",
        None,
        half && seven_eighths,
        format!("{} and {}", rayleigh_dowker_bracket(1), rayleigh_dowker_bracket(3)),
    ))
}

fn boyer_pressure() -> Result<Check> {
    Ok(Check::relative(
        "interior permeable pressure a=1",
        "7π²/1920 ≈ 0.035983",
        0.035983,
        pressure_inside_permeable(1.0),
        1e-5,
    ))
}

fn shaft_pressure() -> Result<Check> {
    Ok(Check::relative(
        "long-shaft pressure b=1",
        "0.915965/24 ≈ 0.0381652",
        0.915965 / 24.0,
        pressure_long_shaft(1.0),
        1e-6,
    ))
}

fn net_force_example() -> Result<Check> {
    let r = net_piston_force_3d(&PistonAssembly3D::new(0.1, 1.0, 100.0)?);
    let want = 0.035983 / 1e-4 - 0.038165;
    Ok(Check::relative(
        "net piston force a=0.1 b=1",
        "b²(0.035983/a⁴ - 0.038165) ≈ +359.79",
        want,
        r.force,
        1e-5,
    )
    .and_class(r.classification, Classification::Repulsive))
}

fn net_force_repulsive() -> Result<Check> {
    let forces = [0.05, 0.1, 0.2]
        .iter()
        .map(|&a| Ok(net_piston_force_3d(&PistonAssembly3D::new(a, 1.0, 100.0)?)))
        .collect::<Result<Vec<_>>>()?;
    let pass = forces.iter().all(|r| r.classification == Classification::Repulsive);
    let list: Vec<String> = forces.iter().map(|r| format!("{:.4}", r.force)).collect();
    Ok(Check::claim(
        "net piston force a/b in {0.05, 0.1, 0.2}",
        "positive if a << b",
        None,
        pass,
        format!("forces {}", list.join(", ")),
    ))
}

fn box_pressure(a: f64) -> Result<f64> {
    Ok(box_force_numeric(&BoxSpec::conducting(a, 1.0, 1.0)?, &PipelineOptions::default())?.force)
}

fn parallel_plate() -> Result<Check> {
    Ok(Check::relative(
        "box pressure a/b=0.02",
        "-π²/240a⁴",
        pressure_lukosz(0.02),
        box_pressure(0.02)?,
        0.02,
    ))
}

fn long_shaft() -> Result<Check> {
    Ok(Check::relative(
        "box pressure a/b=50",
        "+0.9159655/24b⁴",
        CATALAN / 24.0,
        box_pressure(50.0)?,
        0.02,
    ))
}

fn cube() -> Result<Vec<Check>> {
    let v = cube_permeable_verdict(1.0, &PipelineOptions::default())?;
    let mut attractive = Check::claim(
        "permeable cube piston",
        "attractive in the cubical configuration",
        Some(v.permeable_force.force),
        v.classification == Classification::Attractive,
        format!(
            "2F(2a)-F(a) = {:.6} is {}; net with exterior shaft {:.6}; sign of E(2a)-E(a) alone reads {}",
            v.permeable_force.force, v.classification, v.net_with_shaft, v.energy_sign_reading
        ),
    );
    attractive.expected = None;
    Ok(vec![
        Check::claim(
            "cube energy sign",
            "E(1,1,1) > 0, already repulsive",
            Some(v.energy_cube),
            v.energy_positive,
            String::new(),
        ),
        Check::claim(
            "E(2,1,1) closer to E(1,1,1)/2",
            "|E2 - E1/2| < |E2 - E1|",
            Some(v.energy_doubled),
            v.closer_to_half,
            format!(
                "|E2-E1/2| = {:.6}, |E2-E1| = {:.6}",
                (v.energy_doubled - 0.5 * v.energy_cube).abs(),
                (v.energy_doubled - v.energy_cube).abs()
            ),
        ),
        attractive,
    ])
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("interval DD a=1 modes", dd_modes),
    ("interval NN a=1 modes", nn_modes),
    ("interval DN a=2 modes", dn_modes),
    ("star N=4 degeneracy N-1", star_degeneracy),
    ("star N=1 reduces to interval a", star_reduction_one),
    ("star N=2 reduces to interval 2a", star_reduction_two),
    ("DN E(t=0.01) two-term asymptotic", dn_asymptotic),
    ("DN finite part, five-rung ladder", dn_finite_part),
    ("star N=4 finite part", star_finite_part_n4),
    ("DN closed-form energy", dn_closed_form),
    ("DD force a=1", dd_force),
    ("DN force a=1", dn_force),
    ("star N=3 force", star_force_null),
    ("star N=4 force", star_force_n4),
    ("star N=5 force", star_force_n5),
    ("Dirichlet star attractive, N=2..6", dirichlet_star_attractive),
    ("transform of DD energy", rayleigh_dowker_dd),
    ("transform brackets", brackets),
    ("interior permeable pressure a=1", boyer_pressure),
    ("long-shaft pressure b=1", shaft_pressure),
    ("net piston force a=0.1 b=1", net_force_example),
    ("net piston force a/b in {0.05, 0.1, 0.2}", net_force_repulsive),
    ("box pressure a/b=0.02", parallel_plate),
    ("box pressure a/b=50", long_shaft),
];

/// Runs every check concurrently; the order of the result is fixed.
pub fn run_suite() -> Vec<Check> {
    let (mut checks, cube_checks) = rayon::join(
        || {
            CHECKS
                .par_iter()
                .map(|(name, f)| f().unwrap_or_else(|e| Check::failed(name, e)))
                .collect::<Vec<_>>()
        },
        || cube().unwrap_or_else(|e| vec![Check::failed("cube verdicts", e)]),
    );
    checks.extend(cube_checks);
    checks
}
