//! Exponential-cutoff sums and finite-part extraction.
//!
//! For a spectrum `ω_n` the cylinder trace is `T(t) = Σ e^{−ω_n t}` and the
//! regularized energy is `E(t) = ½ Σ ω_n e^{−ω_n t} = −½ T′(t)`. Both are
//! evaluated over the enumerated modes with a certified bound on the part of
//! the sum lying above the enumeration ceiling.

mod fit;
mod heat;
mod pipeline;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{Spectrum, WeylTail};
use crate::sum::NeumaierSum;

pub use fit::{extract_finite_part, Coefficient, DivergenceTemplate, DivergentTerm, FinitePartFit, FitOptions};
pub use heat::{box_finite_part_exact, BoxHeatTrace};
pub use pipeline::{
    box_finite_part, closed_form_energy_1d, interval_finite_part, star_finite_part, Ladder, PipelineOptions,
    PipelineRun, StarPipeline,
};

/// Default ratio between a certified tail bound and the leading divergent term.
pub const DEFAULT_TAIL_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSample {
    pub t: f64,
    pub trace: f64,
    pub energy: f64,
    pub trace_bound: f64,
    pub energy_bound: f64,
}

/// A value together with a certified bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub bound: f64,
}

/// Anything that can produce cutoff samples `T(t)`, `E(t)`.
pub trait CutoffSource: Sync {
    fn sample(&self, t: f64, tail_rel: f64) -> Result<CutoffSample>;
}

impl CutoffSource for Spectrum {
    fn sample(&self, t: f64, tail_rel: f64) -> Result<CutoffSample> {
        let trace = cylinder_trace_with(self, t, tail_rel)?;
        let energy = regularized_energy_with(self, t, tail_rel)?;
        Ok(CutoffSample {
            t,
            trace: trace.value,
            energy: energy.value,
            trace_bound: trace.bound,
            energy_bound: energy.bound,
        })
    }
}

/// Adds the Weyl part of exterior segments of combined length
/// `exterior_length` to another source. Only the divergent bookkeeping term
/// survives for long exterior segments, so the finite part is unchanged.
#[derive(Debug, Clone)]
pub struct WithExterior<S> {
    pub inner: S,
    pub exterior_length: f64,
}

impl<S: CutoffSource> CutoffSource for WithExterior<S> {
    fn sample(&self, t: f64, tail_rel: f64) -> Result<CutoffSample> {
        let mut s = self.inner.sample(t, tail_rel)?;
        let total = self.exterior_length;
        s.trace += total / (std::f64::consts::PI * t);
        s.energy += total / (2.0 * std::f64::consts::PI * t * t);
        Ok(s)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("cutoff t must be positive and finite, got {t}")))
    }
}

/// `Γ(n+1, x) = n! e^{−x} Σ_{i≤n} x^i/i!`.
fn upper_gamma_int(n: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut series = 1.0;
    for i in 1..=n {
        term *= x / f64::from(i);
        series += term;
    }
    let fact: f64 = (1..=n).map(f64::from).product();
    fact * (-x).exp() * series
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Certified bound on `Σ_{ω > omega} ω^p e^{−ωt}` over the modes above
/// `omega`, using the tail envelope `N(ω) ≤ A(ω+δ)^d`.
///
/// Infinite when `omega < p/t`, where the summand is not yet decreasing.
pub fn tail_bound(tail: &WeylTail, omega: f64, t: f64, p: u32) -> f64 {
    if omega < f64::from(p) / t {
        return f64::INFINITY;
    }
    let d = tail.dimension;
    let a = tail.envelope_scale;
    let delta = tail.envelope_shift;
    let boundary = tail.envelope(omega) * omega.powi(p as i32) * (-omega * t).exp();
    let x = omega * t;
    let integral: f64 = (0..d)
        .map(|j| {
            binomial(d - 1, j) * delta.powi((d - 1 - j) as i32) * upper_gamma_int(j + p, x) / t.powi((j + p + 1) as i32)
        })
        .sum();
    boundary + a * f64::from(d) * integral
}

fn trace_tolerance(tail: &WeylTail, t: f64, tail_rel: f64) -> f64 {
    tail_rel * tail.leading_trace(t)
}

fn energy_tolerance(tail: &WeylTail, t: f64, tail_rel: f64) -> f64 {
    tail_rel * tail.leading_energy(t)
}

/// Smallest ceiling (to within 0.1%) whose trace and energy tail bounds at `t`
/// both meet `tail_rel` times the leading divergent term.
pub fn required_omega_max(tail: &WeylTail, t: f64, tail_rel: f64) -> f64 {
    let ok = |omega: f64| {
        tail_bound(tail, omega, t, 0) <= trace_tolerance(tail, t, tail_rel)
            && 0.5 * tail_bound(tail, omega, t, 1) <= energy_tolerance(tail, t, tail_rel)
    };
    let mut lo = f64::from(tail.dimension + 1) / t;
    if ok(lo) {
        return lo;
    }
    let mut hi = 2.0 * lo;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn insufficient(spectrum: &Spectrum, t: f64, tail_rel: f64) -> Error {
    Error::InsufficientSpectrum {
        t,
        omega_max: spectrum.omega_max(),
        required_omega_max: required_omega_max(spectrum.tail(), t, tail_rel),
    }
}

/// `T(t)` with the default tail tolerance.
pub fn cylinder_trace(spectrum: &Spectrum, t: f64) -> Result<Bounded> {
    cylinder_trace_with(spectrum, t, DEFAULT_TAIL_REL)
}

pub fn cylinder_trace_with(spectrum: &Spectrum, t: f64, tail_rel: f64) -> Result<Bounded> {
    check_t(t)?;
    let bound = tail_bound(spectrum.tail(), spectrum.omega_max(), t, 0);
    if !(bound <= trace_tolerance(spectrum.tail(), t, tail_rel)) {
        return Err(insufficient(spectrum, t, tail_rel));
    }
    let mut acc = NeumaierSum::new();
    for m in spectrum.modes() {
        acc.add(f64::from(m.multiplicity) * (-m.omega * t).exp());
    }
    Ok(Bounded {
        value: acc.value(),
        bound,
    })
}

/// `E(t)` with the default tail tolerance.
pub fn regularized_energy(spectrum: &Spectrum, t: f64) -> Result<Bounded> {
    regularized_energy_with(spectrum, t, DEFAULT_TAIL_REL)
}

pub fn regularized_energy_with(spectrum: &Spectrum, t: f64, tail_rel: f64) -> Result<Bounded> {
    check_t(t)?;
    let bound = 0.5 * tail_bound(spectrum.tail(), spectrum.omega_max(), t, 1);
    if !(bound <= energy_tolerance(spectrum.tail(), t, tail_rel)) {
        return Err(insufficient(spectrum, t, tail_rel));
    }
    let mut acc = NeumaierSum::new();
    for m in spectrum.modes().iter().filter(|m| !m.zero_mode) {
        acc.add(f64::from(m.multiplicity) * m.omega * (-m.omega * t).exp());
    }
    Ok(Bounded {
        value: 0.5 * acc.value(),
        bound,
    })
}

/// Samples a source at every cutoff, in parallel, preserving order.
pub fn sample_ladder<S: CutoffSource + ?Sized>(source: &S, times: &[f64], tail_rel: f64) -> Result<Vec<CutoffSample>> {
    times.par_iter().map(|&t| source.sample(t, tail_rel)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{interval_spectrum, BoundaryCondition, Geometry, IntervalSpec, Mode};
    use std::f64::consts::PI;
    use BoundaryCondition::{Dirichlet as D, Neumann as N};

    fn interval(a: f64, l: BoundaryCondition, r: BoundaryCondition) -> IntervalSpec {
        IntervalSpec::new(a, l, r).unwrap()
    }

    fn spectrum_for(spec: &IntervalSpec, t: f64) -> Spectrum {
        let omega = required_omega_max(&Geometry::Interval(*spec).tail(), t, DEFAULT_TAIL_REL);
        interval_spectrum(spec, omega).unwrap()
    }

    #[test]
    fn dn_trace_at_unit_cutoff() {
        let spec = interval(1.0, D, N);
        let s = spectrum_for(&spec, 1.0);
        let v = cylinder_trace(&s, 1.0).unwrap().value;
        assert!((v - 1.0 / (2.0 * (PI / 2.0).sinh())).abs() < 1e-13, "{v}");
        assert!((v - 0.217265).abs() < 5e-6, "{v}");
    }

    #[test]
    fn dd_trace_approaches_single_exponential() {
        let spec = interval(1.0, D, D);
        let s = interval_spectrum(&spec, 100.0).unwrap();
        let v = cylinder_trace(&s, 20.0).unwrap().value;
        assert!((v / (-PI * 20.0).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dd_energy_constant_term() {
        let spec = interval(1.0, D, D);
        let t = 1e-3;
        let s = spectrum_for(&spec, t);
        let e = regularized_energy(&s, t).unwrap().value;
        let remainder = e - 1.0 / (2.0 * PI * t * t);
        assert!((remainder + PI / 24.0).abs() < 1e-5, "{remainder}");
        // closed form ½ d/dt of −1/(e^{πt}−1)
        let y = PI * t;
        let exact = 0.5 * PI * y.exp() / y.exp_m1().powi(2);
        assert!((e - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn dn_energy_two_term_asymptotic() {
        let spec = interval(1.0, D, N);
        let t = 0.01;
        let s = spectrum_for(&spec, t);
        let e = regularized_energy(&s, t).unwrap().value;
        let asym = 1.0 / (2.0 * PI * t * t) + PI / 48.0;
        assert!((e - asym).abs() < 1e-3);
    }

    #[test]
    fn zero_mode_carries_no_energy() {
        let s = Spectrum::new(Geometry::Interval(interval(1.0, N, N)), vec![Mode::new(0.0, 1)], 1.0).unwrap();
        for t in [200.0, 400.0] {
            assert_eq!(regularized_energy(&s, t).unwrap().value, 0.0);
            assert_eq!(cylinder_trace(&s, t).unwrap().value, 1.0);
        }
    }

    #[test]
    fn short_spectrum_is_rejected_with_requirement() {
        let spec = interval(1.0, D, D);
        let s = interval_spectrum(&spec, 10.0).unwrap();
        match cylinder_trace(&s, 0.01) {
            Err(Error::InsufficientSpectrum { required_omega_max, .. }) => {
                let s2 = interval_spectrum(&spec, required_omega_max).unwrap();
                assert!(cylinder_trace(&s2, 0.01).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        for (l, r) in [(D, D), (D, N), (N, N)] {
            let spec = interval(1.3, l, r);
            let full = interval_spectrum(&spec, 2000.0).unwrap();
            let t = 0.05;
            for cut in [50.0, 100.0, 200.0] {
                let actual: f64 = full
                    .modes()
                    .iter()
                    .filter(|m| m.omega > cut)
                    .map(|m| m.omega * (-m.omega * t).exp())
                    .sum();
                let bound = tail_bound(full.tail(), cut, t, 1);
                assert!(actual <= bound, "{actual} > {bound}");
            }
        }
    }

    #[test]
    fn derivative_identity() {
        let spec = interval(1.0, D, N);
        let t = 1.0;
        let s = spectrum_for(&spec, 0.5);
        let trace = |t| cylinder_trace(&s, t).unwrap().value;
        let e = regularized_energy(&s, t).unwrap().value;
        let mut previous = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let gap = ((trace(t + h) - trace(t - h)) / (2.0 * h) + 2.0 * e).abs();
            assert!(gap < h * h, "h={h} gap={gap}");
            assert!(gap < previous / 3.0);
            previous = gap;
        }
    }

    #[test]
    fn dn_trace_matches_sinh_form_across_scales() {
        let spec = interval(1.0, D, N);
        let s = spectrum_for(&spec, 0.01);
        let mut t = 0.01;
        while t <= 10.0 {
            let b = cylinder_trace(&s, t).unwrap();
            let exact = 1.0 / (2.0 * (PI * t / 2.0).sinh());
            assert!((b.value - exact).abs() <= b.bound + 1e-13 * exact, "t={t}");
            t *= 1.7;
        }
    }
}
