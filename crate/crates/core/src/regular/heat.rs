//! Box cutoff sums through the heat trace.
//!
//! The cylinder kernel is subordinated to the heat kernel,
//! `e^{−ωt} = ∫₀^∞ t/(2√π) s^{−3/2} e^{−t²/4s} e^{−ω²s} ds`,
//! and the box heat trace factorizes into one-dimensional theta sums
//! `θ_x(s) = Σ_{l≥1} e^{−(πl/x)² s}`. Small `s` uses the Jacobi transform, so
//! no mode enumeration is needed even for very elongated boxes.

use std::f64::consts::PI;

use super::{CutoffSample, CutoffSource};
use crate::error::{Error, Result};
use crate::spectra::{BoxSpec, WallModel};
use crate::sum::NeumaierSum;

/// `θ_x(s)` split as `d + o`: `d = x/(2√(πs)) − ½` is the smooth part and
/// `o` the exponentially small remainder.
#[derive(Debug, Clone, Copy)]
struct Theta {
    smooth: f64,
    osc: f64,
}

impl Theta {
    fn new(x: f64, s: f64) -> Self {
        let w = x / (2.0 * (PI * s).sqrt());
        let smooth = w - 0.5;
        let q = PI * PI * s / (x * x);
        if q > 1.0 {
            let mut tot = 0.0;
            for l in 1u32.. {
                let v = (-q * f64::from(l * l)).exp();
                tot += v;
                if v <= 1e-18 * tot || v == 0.0 {
                    break;
                }
            }
            Theta {
                smooth,
                osc: tot - smooth,
            }
        } else {
            let r = x * x / s;
            let mut tot = 0.0;
            for k in 1u32.. {
                let v = (-r * f64::from(k * k)).exp();
                tot += v;
                if v <= 1e-18 * tot || v == 0.0 {
                    break;
                }
            }
            Theta {
                smooth,
                osc: 2.0 * w * tot,
            }
        }
    }

    fn value(self) -> f64 {
        self.smooth + self.osc
    }
}

/// Heat trace of the conducting box,
/// `2θ_aθ_bθ_c + θ_aθ_b + θ_aθ_c + θ_bθ_c`.
fn conducting_heat_trace(sides: [f64; 3], s: f64) -> f64 {
    let [x, y, z] = sides.map(|side| Theta::new(side, s).value());
    2.0 * x * y * z + x * y + x * z + y * z
}

/// The heat trace with its Weyl polynomial removed, expanded one factor at a
/// time so no large terms cancel.
fn oscillating_heat_trace(sides: [f64; 3], s: f64) -> f64 {
    let [t1, t2, t3] = sides.map(|side| Theta::new(side, s));
    let (d1, o1) = (t1.smooth, t1.osc);
    let (d2, o2) = (t2.smooth, t2.osc);
    let o3 = t3.osc;
    let (f2, f3) = (t2.value(), t3.value());
    o1 * (2.0 * f2 * f3 + f2 + f3) + o2 * (2.0 * d1 * f3 + d1 + f3) + o3 * (2.0 * d1 * d2 + d1 + d2)
}

fn doubled(spec: &BoxSpec) -> [f64; 3] {
    let [a, b1, b2] = spec.sides();
    [2.0 * a, b1, b2]
}

/// Cutoff sums for an electromagnetic box via the heat trace.
#[derive(Debug, Clone)]
pub struct BoxHeatTrace {
    spec: BoxSpec,
    step: f64,
}

const DEFAULT_STEP: f64 = 0.1;
const MAX_HALVINGS: u32 = 4;

impl BoxHeatTrace {
    pub fn new(spec: BoxSpec) -> Self {
        Self {
            spec,
            step: DEFAULT_STEP,
        }
    }

    pub fn spec(&self) -> &BoxSpec {
        &self.spec
    }

    pub fn heat_trace(&self, s: f64) -> f64 {
        match self.spec.wall() {
            WallModel::AllConducting => conducting_heat_trace(self.spec.sides(), s),
            WallModel::PermeablePiston => {
                conducting_heat_trace(doubled(&self.spec), s) - conducting_heat_trace(self.spec.sides(), s)
            }
        }
    }

    fn largest_side(&self) -> f64 {
        match self.spec.wall() {
            WallModel::AllConducting => self.spec.max_side(),
            WallModel::PermeablePiston => self.spec.max_side().max(2.0 * self.spec.a()),
        }
    }

    /// Trapezoid sums in `u = ln s` at `step` and `2·step`:
    /// `(trace, energy, trace at 2·step, energy at 2·step)`.
    fn integrate(&self, t: f64, step: f64) -> [f64; 4] {
        let lo = (t * t / 4.0).ln() - 6.0;
        let hi = (self.largest_side().powi(2)).ln() + 6.0;
        let mut n = ((hi - lo) / step).ceil() as usize;
        n += n % 2;
        let norm = 1.0 / (2.0 * PI.sqrt());
        let mut sums = [
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
        ];
        for i in 0..=n {
            let s = (lo + i as f64 * step).exp();
            let g = norm * s.powf(-0.5) * (-t * t / (4.0 * s)).exp() * self.heat_trace(s);
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            let trace = t * g;
            let energy = -0.5 * g * (1.0 - t * t / (2.0 * s));
            sums[0].add(weight * trace);
            sums[1].add(weight * energy);
            if i % 2 == 0 {
                sums[2].add(weight * trace);
                sums[3].add(weight * energy);
            }
        }
        let [a, b, c, d] = sums.map(|x| x.value());
        [a * step, b * step, c * 2.0 * step, d * 2.0 * step]
    }
}

impl CutoffSource for BoxHeatTrace {
    fn sample(&self, t: f64, tail_rel: f64) -> Result<CutoffSample> {
        super::check_t(t)?;
        let tail = crate::spectra::Geometry::Box(self.spec).tail();
        let mut step = self.step;
        for _ in 0..=MAX_HALVINGS {
            let [trace, energy, trace2, energy2] = self.integrate(t, step);
            let trace_bound = (trace - trace2).abs();
            let energy_bound = (energy - energy2).abs();
            if trace_bound <= tail_rel * tail.leading_trace(t) && energy_bound <= tail_rel * tail.leading_energy(t) {
                return Ok(CutoffSample {
                    t,
                    trace,
                    energy,
                    trace_bound,
                    energy_bound,
                });
            }
            step *= 0.5;
        }
        Err(Error::NumericalFailure {
            lo: (t * t / 4.0).ln() - 6.0,
            hi: self.largest_side().powi(2).ln() + 6.0,
            iterations: MAX_HALVINGS as usize,
        })
    }
}

/// Finite part of the box energy from the Weyl-subtracted heat trace,
/// `E₀ = −(1/4√π) ∫₀^∞ s^{−3/2} (K(s) − K_Weyl(s)) ds`.
///
/// Independent of any cutoff fit; used to cross-check the fitted pipeline.
pub fn box_finite_part_exact(spec: &BoxSpec) -> Result<f64> {
    let conducting = |sides: [f64; 3]| -> Result<f64> {
        let (min, max) = sides
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let lo = (min * min).ln() - 8.0;
        let hi = (max * max).ln() + 80.0;
        let integral = |step: f64| {
            let n = ((hi - lo) / step).ceil() as usize;
            let mut acc = NeumaierSum::new();
            for i in 0..=n {
                let s = (lo + i as f64 * step).exp();
                let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc.add(weight * s.powf(-0.5) * oscillating_heat_trace(sides, s));
            }
            -acc.value() * step / (4.0 * PI.sqrt())
        };
        let fine = integral(0.05);
        let coarse = integral(0.1);
        if (fine - coarse).abs() > 1e-10 * fine.abs().max(1.0 / min) {
            return Err(Error::NumericalFailure { lo, hi, iterations: 2 });
        }
        Ok(fine)
    };
    match spec.wall() {
        WallModel::AllConducting => conducting(spec.sides()),
        WallModel::PermeablePiston => Ok(conducting(doubled(spec))? - conducting(spec.sides())?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regular::cylinder_trace_with;
    use crate::regular::regularized_energy_with;
    use crate::spectra::box_em_spectrum;

    #[test]
    fn theta_branches_agree() {
        for x in [0.3, 1.0, 2.5] {
            let s = x * x / (PI * PI);
            for f in [0.999, 1.0, 1.001] {
                let th = Theta::new(x, s * f).value();
                let expect: f64 = (1..200).map(|l| (-(PI * l as f64 / x).powi(2) * s * f).exp()).sum();
                assert!((th - expect).abs() < 1e-14, "{x} {f}");
            }
        }
    }

    #[test]
    fn matches_enumerated_spectrum() {
        for wall in [WallModel::AllConducting, WallModel::PermeablePiston] {
            let spec = BoxSpec::new(1.0, 1.2, 0.8, wall).unwrap();
            let t = 0.3;
            let spectrum = box_em_spectrum(&spec, 200.0).unwrap();
            let heat = BoxHeatTrace::new(spec).sample(t, 1e-12).unwrap();
            let trace = cylinder_trace_with(&spectrum, t, 1e-12).unwrap();
            let energy = regularized_energy_with(&spectrum, t, 1e-12).unwrap();
            assert!((heat.trace - trace.value).abs() < 1e-10 * trace.value, "{wall}");
            assert!((heat.energy - energy.value).abs() < 1e-10 * energy.value, "{wall}");
        }
    }

    #[test]
    fn cube_energy_at_fixed_cutoff() {
        let s = BoxHeatTrace::new(BoxSpec::conducting(1.0, 1.0, 1.0).unwrap())
            .sample(0.3, 1e-10)
            .unwrap();
        assert!((s.energy - 34.96387825037).abs() < 1e-8);
    }

    #[test]
    fn exact_finite_part_of_cube() {
        let e = box_finite_part_exact(&BoxSpec::conducting(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((e - 0.0916574270123517).abs() < 1e-12, "{e}");
    }

    #[test]
    fn exact_finite_part_scales_inversely() {
        let e1 = box_finite_part_exact(&BoxSpec::conducting(1.0, 0.7, 1.3).unwrap()).unwrap();
        let e2 = box_finite_part_exact(&BoxSpec::conducting(3.0, 2.1, 3.9).unwrap()).unwrap();
        assert!((e1 - 3.0 * e2).abs() < 1e-11);
    }
}
