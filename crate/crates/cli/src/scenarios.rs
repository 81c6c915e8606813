//! Scenario execution: geometry config in, report sections out.

use std::f64::consts::PI;

use pistonlab::piston::{
    box_force_numeric, crossover_aspect, crossover_aspect_closed_form, force_analytic_interval, force_analytic_star,
    force_numeric, net_piston_force_3d, pressure_inside_permeable, pressure_long_shaft, pressure_lukosz,
    PistonAssembly3D, DEFAULT_STEP_REL, SLAB_REGIME_LIMIT,
};
use pistonlab::regular::{
    box_finite_part, box_finite_part_exact, closed_form_energy_1d, interval_finite_part, star_finite_part,
    PipelineOptions, StarPipeline,
};
use pistonlab::spectra::{
    box_em_spectrum, interval_spectrum, star_spectrum_with, BoundaryCondition, BoxSpec, IntervalSpec, RootOptions,
    Spectrum, StarGraphSpec, StarSolver, WallModel,
};
use pistonlab::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{EndPair, GeometryConfig, ScenarioKind};
use crate::report::to_value;

/// Everything a scenario run produces before formatting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub diagnostics: Map<String, Value>,
    pub spectrum: Option<Spectrum>,
}

/// Null band for numerically differentiated 1-D forces: the force tolerance
/// times the natural force scale `π/48a²`.
pub fn null_epsilon_1d(a: f64) -> f64 {
    1e-5 * PI / (48.0 * a * a)
}

/// Aspect ratio past which the box is read as a long shaft.
const SHAFT_REGIME_LIMIT: f64 = 5.0;

pub fn execute(
    kind: ScenarioKind,
    geometry: &GeometryConfig,
    options: &PipelineOptions,
    want_spectrum: bool,
) -> Result<Outcome> {
    match kind {
        ScenarioKind::Interval => interval(geometry, options, want_spectrum),
        ScenarioKind::Star => star(geometry, options, want_spectrum),
        ScenarioKind::Box => box_scenario(geometry, options, want_spectrum),
        ScenarioKind::Piston3d => piston3d(geometry),
        ScenarioKind::PaperSuite => Err(Error::InvalidInput("paper-suite is not a geometry scenario".into())),
    }
}

fn inputs(geometry: Value, options: &PipelineOptions) -> Value {
    json!({ "geometry": geometry, "numerics": to_value(options) })
}

fn relative(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        x.abs()
    } else {
        (x - reference).abs() / reference.abs()
    }
}

fn interval(g: &GeometryConfig, options: &PipelineOptions, want_spectrum: bool) -> Result<Outcome> {
    let EndPair(left, right) =
        g.bc.unwrap_or(EndPair(BoundaryCondition::Dirichlet, BoundaryCondition::Neumann));
    let a = g.a.unwrap_or(1.0);
    let spec = IntervalSpec::new(a, left, right)?;
    let run = interval_finite_part(&spec, options)?;
    let closed = closed_form_energy_1d(&spec);
    let mut results = json!({
        "finite_part": run.finite_part(),
        "closed_form": closed,
        "relative_error": relative(run.finite_part(), closed),
        "fit": to_value(&run.fit),
    });
    if g.force.unwrap_or(false) {
        let energy = |x: f64| Ok(interval_finite_part(&spec.with_length(x)?, options)?.finite_part());
        let report = force_numeric(energy, a, a * DEFAULT_STEP_REL, null_epsilon_1d(a))?
            .with_analytic(force_analytic_interval(&spec).force);
        results["force"] = to_value(&report);
    }
    let spectrum = match (want_spectrum, g.spectrum_ceiling) {
        (false, _) => None,
        (true, Some(ceiling)) => Some(interval_spectrum(&spec, ceiling)?),
        (true, None) => run.spectrum,
    };
    Ok(Outcome {
        inputs: inputs(
            json!({"bc": spec.code(), "a": a, "force": g.force.unwrap_or(false)}),
            options,
        ),
        results,
        diagnostics: Map::new(),
        spectrum,
    })
}

fn star_spec(g: &GeometryConfig) -> Result<StarGraphSpec> {
    let piston = g.piston.unwrap_or(BoundaryCondition::Neumann);
    match &g.lengths {
        Some(lengths) => StarGraphSpec::new(lengths.clone(), piston),
        None => StarGraphSpec::equal(g.n.unwrap_or(3), g.a.unwrap_or(1.0), piston),
    }
}

fn star(g: &GeometryConfig, options: &PipelineOptions, want_spectrum: bool) -> Result<Outcome> {
    let spec = star_spec(g)?;
    let pipeline = StarPipeline {
        shaft_length: g.shaft_length,
        roots: RootOptions {
            solver: if g.root_finder.unwrap_or(false) {
                StarSolver::RootFinder
            } else {
                StarSolver::Auto
            },
            ..RootOptions::default()
        },
    };
    let run = star_finite_part(&spec, &pipeline, options)?;
    let mut results = Map::new();
    results.insert("finite_part".into(), json!(run.finite_part()));
    let mut diagnostics = Map::new();
    let force = g.force.unwrap_or(false);
    match spec.common_length() {
        Some(a) => {
            let n = spec.edges();
            let closed_force = force_analytic_star(n, a, spec.piston())?.force;
            let closed = closed_force * a;
            results.insert("closed_form".into(), json!(closed));
            results.insert("relative_error".into(), json!(relative(run.finite_part(), closed)));
            results.insert("fit".into(), to_value(&run.fit));
            if force {
                let energy = |x: f64| {
                    Ok(
                        star_finite_part(&StarGraphSpec::equal(n, x, spec.piston())?, &pipeline, options)?
                            .finite_part(),
                    )
                };
                let report =
                    force_numeric(energy, a, a * DEFAULT_STEP_REL, null_epsilon_1d(a))?.with_analytic(closed_force);
                results.insert("force".into(), to_value(&report));
            }
        }
        None => {
            results.insert("fit".into(), to_value(&run.fit));
            if force {
                let lengths = spec.edge_lengths().to_vec();
                let partials = (0..lengths.len())
                    .into_par_iter()
                    .map(|j| {
                        let energy = |x: f64| {
                            let mut moved = lengths.clone();
                            moved[j] = x;
                            let moved = StarGraphSpec::new(moved, spec.piston())?;
                            Ok(star_finite_part(&moved, &pipeline, options)?.finite_part())
                        };
                        let a = lengths[j];
                        force_numeric(energy, a, a * DEFAULT_STEP_REL, null_epsilon_1d(a))
                    })
                    .collect::<Result<Vec<_>>>()?;
                diagnostics.insert(
                    "note".into(),
                    json!(
                        "partial forces on each piston with the others held fixed; no closed form for unequal lengths"
                    ),
                );
                diagnostics.insert("partial_forces".into(), to_value(&partials));
            }
        }
    }
    let spectrum = match (want_spectrum, g.spectrum_ceiling) {
        (false, _) => None,
        (true, Some(ceiling)) => Some(star_spectrum_with(&spec, ceiling, &pipeline.roots)?),
        (true, None) => run.spectrum,
    };
    Ok(Outcome {
        inputs: inputs(
            json!({
                "lengths": spec.edge_lengths(),
                "piston": spec.piston().letter().to_string(),
                "shaft_length": g.shaft_length,
                "solver": to_value(&pipeline.roots.solver),
                "force": force,
            }),
            options,
        ),
        results: Value::Object(results),
        diagnostics,
        spectrum,
    })
}

fn box_spec(g: &GeometryConfig) -> Result<BoxSpec> {
    let a = g.a.unwrap_or(1.0);
    let b1 = g.b1.or(g.b).unwrap_or(1.0);
    let b2 = g.b2.or(g.b).unwrap_or(1.0);
    BoxSpec::new(a, b1, b2, g.wall.unwrap_or(WallModel::AllConducting))
}

fn box_scenario(g: &GeometryConfig, options: &PipelineOptions, want_spectrum: bool) -> Result<Outcome> {
    let spec = box_spec(g)?;
    let [a, b1, b2] = spec.sides();
    let run = box_finite_part(&spec, options)?;
    let exact = box_finite_part_exact(&spec)?;
    let mut results = json!({
        "finite_part": run.finite_part(),
        "exact_finite_part": exact,
        "relative_error": relative(run.finite_part(), exact),
        "fit": to_value(&run.fit),
    });
    let mut diagnostics = Map::new();
    if g.force.unwrap_or(false) {
        let report = box_force_numeric(&spec, options)?;
        let pressure = report.force / (b1 * b2);
        results["force"] = to_value(&report);
        results["pressure"] = json!(pressure);
        let aspect = a / b1.min(b2);
        let slab = match spec.wall() {
            WallModel::AllConducting => pressure_lukosz(a),
            WallModel::PermeablePiston => pressure_inside_permeable(a),
        };
        let mut references = json!({ "slab": slab });
        if b1 == b2 && spec.wall() == WallModel::AllConducting {
            references["long_shaft"] = json!(pressure_long_shaft(b1));
        }
        results["reference_pressures"] = references;
        let regime = if aspect < SLAB_REGIME_LIMIT {
            "slab"
        } else if aspect > SHAFT_REGIME_LIMIT {
            "shaft"
        } else {
            "intermediate"
        };
        diagnostics.insert("aspect".into(), json!(aspect));
        diagnostics.insert("regime".into(), json!(regime));
    }
    let spectrum = if want_spectrum {
        let ceiling = g.spectrum_ceiling.unwrap_or(10.0 * PI / spec.min_side());
        Some(box_em_spectrum(&spec, ceiling)?)
    } else {
        None
    };
    Ok(Outcome {
        inputs: inputs(
            json!({"a": a, "b1": b1, "b2": b2, "wall": spec.wall().to_string(), "force": g.force.unwrap_or(false)}),
            options,
        ),
        results,
        diagnostics,
        spectrum,
    })
}

fn piston3d(g: &GeometryConfig) -> Result<Outcome> {
    let a = g.a.unwrap_or(0.1);
    let b = g.b.unwrap_or(1.0);
    let shaft_length = g.shaft_length.unwrap_or(a + 100.0 * b);
    let assembly = PistonAssembly3D::new(a, b, shaft_length)?;
    let net = net_piston_force_3d(&assembly);
    let mut diagnostics = Map::new();
    diagnostics.insert("warnings".into(), json!(assembly.warnings));
    Ok(Outcome {
        inputs: json!({ "geometry": {"a": a, "b": b, "shaft_length": shaft_length} }),
        results: json!({
            "assembly": to_value(&assembly),
            "net_force": to_value(&net),
            "aspect": a / b,
            "crossover_aspect": crossover_aspect(),
            "crossover_aspect_closed_form": crossover_aspect_closed_form(),
        }),
        diagnostics,
        spectrum: None,
    })
}

/// Columns shown by the sweep table for each scenario.
pub fn headline(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::Interval | ScenarioKind::Star => &[
            "results.finite_part",
            "results.closed_form",
            "results.force.force",
            "results.force.classification",
        ],
        ScenarioKind::Box => &[
            "results.finite_part",
            "results.exact_finite_part",
            "results.pressure",
            "results.reference_pressures.slab",
            "results.reference_pressures.long_shaft",
            "diagnostics.regime",
        ],
        ScenarioKind::Piston3d => &[
            "results.aspect",
            "results.net_force.force",
            "results.net_force.classification",
        ],
        ScenarioKind::PaperSuite => &[],
    }
}

/// Copy of `base` with one sweep parameter set.
pub fn with_param(base: &GeometryConfig, kind: ScenarioKind, param: &str, value: f64) -> Result<GeometryConfig> {
    let mut g = base.clone();
    match param {
        "a" => g.a = Some(value),
        "n" => {
            if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
                return Err(Error::InvalidInput(format!(
                    "n must be a positive integer, got {value}"
                )));
            }
            g.n = Some(value as usize);
        }
        "b" => g.b = Some(value),
        "b1" => g.b1 = Some(value),
        "b2" => g.b2 = Some(value),
        "shaft_length" => g.shaft_length = Some(value),
        "aspect" => {
            let b = match kind {
                ScenarioKind::Box => base.b1.or(base.b).unwrap_or(1.0),
                _ => base.b.unwrap_or(1.0),
            };
            g.a = Some(value * b);
        }
        other => return Err(Error::InvalidInput(format!("unknown sweep parameter '{other}'"))),
    }
    Ok(g)
}
