//! Spectrum → cutoff ladder → fit, per geometry.

use std::f64::consts::PI;

use serde::Serialize;

use super::fit::{extract_finite_part, DivergenceTemplate, FinitePartFit, FitOptions};
use super::heat::BoxHeatTrace;
use super::{required_omega_max, sample_ladder, CutoffSample, CutoffSource, WithExterior, DEFAULT_TAIL_REL};
use crate::error::{Error, Result};
use crate::spectra::{
    interval_spectrum, star_spectrum_with, BoxSpec, Geometry, IntervalSpec, RootOptions, Spectrum, StarGraphSpec,
};

/// Decreasing cutoff values `t₀ > t₁ > …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    times: Vec<f64>,
}

impl Ladder {
    /// `t_k = t0·2^{−k}`, `k = 0..rungs`.
    pub fn geometric(t0: f64, rungs: usize) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) || rungs == 0 {
            return Err(Error::invalid(format!(
                "ladder needs t0 > 0 and rungs > 0 (t0={t0}, rungs={rungs})"
            )));
        }
        Ok(Self {
            times: (0..rungs).map(|k| t0 * 0.5f64.powi(k as i32)).collect(),
        })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("ladder cutoffs must be positive"));
        }
        if times.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("ladder cutoffs must be strictly decreasing"));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn smallest(&self) -> f64 {
        *self.times.last().expect("nonempty ladder")
    }
}

/// Overrides for the pipelines; unset fields take per-geometry defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub ladder: Option<Ladder>,
    /// `t₀` as a fraction of the smallest length, 1/5 by default.
    pub t0_fraction: Option<f64>,
    pub rungs: Option<usize>,
    pub template: Option<DivergenceTemplate>,
    pub tail_rel: f64,
    pub max_condition: f64,
    pub max_residual: f64,
    /// 1e-6 in 1-D, 1e-2 for boxes.
    pub stability_rel: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        let fit = FitOptions::default();
        Self {
            ladder: None,
            t0_fraction: None,
            rungs: None,
            template: None,
            tail_rel: DEFAULT_TAIL_REL,
            max_condition: fit.max_condition,
            max_residual: fit.max_residual,
            stability_rel: None,
        }
    }
}

const RUNGS: usize = 8;
const T0_FRACTION: f64 = 0.2;
const STABILITY_1D: f64 = 1e-6;
const STABILITY_BOX: f64 = 1e-2;

impl PipelineOptions {
    fn ladder_for(&self, length: f64, fraction: f64) -> Result<Ladder> {
        match &self.ladder {
            Some(l) => Ok(l.clone()),
            None => Ladder::geometric(
                self.t0_fraction.unwrap_or(fraction) * length,
                self.rungs.unwrap_or(RUNGS),
            ),
        }
    }

    fn fit_options(&self, length: f64, stability: f64) -> FitOptions {
        FitOptions {
            length_scale: Some(length),
            max_condition: self.max_condition,
            max_residual: self.max_residual,
            stability_rel: self.stability_rel.unwrap_or(stability),
        }
    }
}

/// A finished pipeline: the fit, the samples it used and, for enumerated
/// geometries, the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineRun {
    pub fit: FinitePartFit,
    pub samples: Vec<CutoffSample>,
    #[serde(skip)]
    pub spectrum: Option<Spectrum>,
}

impl PipelineRun {
    pub fn finite_part(&self) -> f64 {
        self.fit.finite_part
    }
}

fn run<S: CutoffSource>(
    source: &S,
    ladder: &Ladder,
    template: &DivergenceTemplate,
    fit: &FitOptions,
    tail_rel: f64,
) -> Result<(FinitePartFit, Vec<CutoffSample>)> {
    let samples = sample_ladder(source, ladder.times(), tail_rel)?;
    Ok((extract_finite_part(&samples, template, fit)?, samples))
}

/// Finite vacuum energy of an interval from its enumerated spectrum.
pub fn interval_finite_part(spec: &IntervalSpec, options: &PipelineOptions) -> Result<PipelineRun> {
    let a = spec.length();
    let ladder = options.ladder_for(a, T0_FRACTION)?;
    let tail = Geometry::Interval(*spec).tail();
    let spectrum = interval_spectrum(spec, required_omega_max(&tail, ladder.smallest(), options.tail_rel))?;
    let template = options
        .template
        .clone()
        .unwrap_or_else(DivergenceTemplate::one_dimensional);
    let (fit, samples) = run(
        &spectrum,
        &ladder,
        &template,
        &options.fit_options(a, STABILITY_1D),
        options.tail_rel,
    )?;
    Ok(PipelineRun {
        fit,
        samples,
        spectrum: Some(spectrum),
    })
}

/// Star-specific settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct StarPipeline {
    /// Full edge length `L`; when set, the exterior segments `L − a_j`
    /// contribute their Weyl term to every sample.
    pub shaft_length: Option<f64>,
    pub roots: RootOptions,
}

/// Finite vacuum energy of a star graph from its (closed-form or solved)
/// spectrum.
pub fn star_finite_part(spec: &StarGraphSpec, star: &StarPipeline, options: &PipelineOptions) -> Result<PipelineRun> {
    let len = spec.min_length();
    let ladder = options.ladder_for(len, T0_FRACTION)?;
    let tail = Geometry::Star(spec.clone()).tail();
    let spectrum = star_spectrum_with(
        spec,
        required_omega_max(&tail, ladder.smallest(), options.tail_rel),
        &star.roots,
    )?;
    let template = options
        .template
        .clone()
        .unwrap_or_else(DivergenceTemplate::one_dimensional);
    let fit_options = options.fit_options(len, STABILITY_1D);
    let (fit, samples) = match star.shaft_length {
        None => run(&spectrum, &ladder, &template, &fit_options, options.tail_rel)?,
        Some(l) => {
            let longest = spec.edge_lengths().iter().copied().fold(0.0, f64::max);
            if !(l.is_finite() && l > longest) {
                return Err(Error::invalid(format!(
                    "shaft length {l} must exceed every piston position"
                )));
            }
            let source = WithExterior {
                inner: spectrum.clone(),
                exterior_length: spec.edges() as f64 * l - spec.total_length(),
            };
            run(&source, &ladder, &template, &fit_options, options.tail_rel)?
        }
    };
    Ok(PipelineRun {
        fit,
        samples,
        spectrum: Some(spectrum),
    })
}

/// Finite vacuum energy of an electromagnetic box from heat-trace cutoff sums.
pub fn box_finite_part(spec: &BoxSpec, options: &PipelineOptions) -> Result<PipelineRun> {
    let len = spec.min_side();
    let ladder = options.ladder_for(len, T0_FRACTION)?;
    let template = options.template.clone().unwrap_or_else(DivergenceTemplate::box_default);
    let (fit, samples) = run(
        &BoxHeatTrace::new(*spec),
        &ladder,
        &template,
        &options.fit_options(len, STABILITY_BOX),
        options.tail_rel,
    )?;
    Ok(PipelineRun {
        fit,
        samples,
        spectrum: None,
    })
}

/// `−π/24a` for like ends, `+π/48a` for mixed ends.
pub fn closed_form_energy_1d(spec: &IntervalSpec) -> f64 {
    if spec.is_mixed() {
        PI / (48.0 * spec.length())
    } else {
        -PI / (24.0 * spec.length())
    }
}
