//! Least-squares removal of cutoff divergences.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::CutoffSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Coefficient {
    Free,
    /// Known a priori, in units of the unscaled cutoff `t`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergentTerm {
    pub power: i32,
    pub coefficient: Coefficient,
}

/// Model `E(t) = Σ c_k t^k + E₀ [+ c·t ln t] + Σ s_j t^j` for the small-`t`
/// behaviour of a regularized energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTemplate {
    divergent: Vec<DivergentTerm>,
    include_log_linear: bool,
    slack_powers: Vec<i32>,
}

impl DivergenceTemplate {
    /// `divergent` is ordered from the most divergent power; `slack_powers`
    /// are positive and increasing.
    pub fn new(divergent: Vec<DivergentTerm>, include_log_linear: bool, slack_powers: Vec<i32>) -> Result<Self> {
        if divergent.iter().any(|d| d.power >= 0) {
            return Err(Error::invalid("divergent powers must be negative"));
        }
        if divergent.windows(2).any(|w| w[0].power >= w[1].power) {
            return Err(Error::invalid("divergent powers must run from most to least divergent"));
        }
        if slack_powers.iter().any(|&p| p <= 0) || slack_powers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("slack powers must be positive and increasing"));
        }
        if let Some(Coefficient::Fixed(c)) = divergent.iter().map(|d| d.coefficient).find(|c| match c {
            Coefficient::Fixed(c) => !c.is_finite(),
            Coefficient::Free => false,
        }) {
            return Err(Error::invalid(format!("fixed coefficient {c} is not finite")));
        }
        Ok(Self {
            divergent,
            include_log_linear,
            slack_powers,
        })
    }

    fn free(powers: &[i32], slack: &[i32]) -> Self {
        let divergent = powers
            .iter()
            .map(|&power| DivergentTerm {
                power,
                coefficient: Coefficient::Free,
            })
            .collect();
        Self::new(divergent, false, slack.to_vec()).expect("static template")
    }

    /// Free `t⁻²` with even slack `t², t⁴`.
    pub fn one_dimensional() -> Self {
        Self::free(&[-2], &[2, 4])
    }

    /// `t⁻²` fixed to its Weyl value, even slack `t², t⁴`.
    pub fn with_weyl(coefficient: f64) -> Result<Self> {
        Self::new(
            vec![DivergentTerm {
                power: -2,
                coefficient: Coefficient::Fixed(coefficient),
            }],
            false,
            vec![2, 4],
        )
    }

    /// Free `t⁻⁴, t⁻²` with even slack `t², t⁴`.
    pub fn box_default() -> Self {
        Self::free(&[-4, -2], &[2, 4])
    }

    /// Every power from `t⁻⁴` to `t⁻¹`, an optional `t ln t` and a linear slack.
    pub fn box_full(include_log_linear: bool) -> Self {
        let mut t = Self::free(&[-4, -3, -2, -1], &[1]);
        t.include_log_linear = include_log_linear;
        t
    }

    pub fn divergent(&self) -> &[DivergentTerm] {
        &self.divergent
    }

    pub fn include_log_linear(&self) -> bool {
        self.include_log_linear
    }

    pub fn slack_powers(&self) -> &[i32] {
        &self.slack_powers
    }

    /// Number of fitted columns, including the finite part.
    pub fn free_count(&self) -> usize {
        self.divergent
            .iter()
            .filter(|d| d.coefficient == Coefficient::Free)
            .count()
            + 1
            + usize::from(self.include_log_linear)
            + self.slack_powers.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Length used to rescale `τ = t/length`; the largest cutoff when unset.
    pub length_scale: Option<f64>,
    pub max_condition: f64,
    pub max_residual: f64,
    /// Allowed change of the finite part when the largest cutoff is dropped,
    /// relative to `max(|E₀|, 1/length)`.
    pub stability_rel: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            length_scale: None,
            max_condition: 1e12,
            max_residual: 1e-6,
            stability_rel: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedTerm {
    pub power: i32,
    pub value: f64,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinitePartFit {
    pub finite_part: f64,
    pub divergent_coeffs: Vec<FittedTerm>,
    /// Coefficient of `τ ln τ` in the rescaled fit.
    pub log_linear: Option<f64>,
    pub slack_coeffs: Vec<FittedTerm>,
    /// Largest residual relative to the largest fitted value.
    pub residual: f64,
    pub condition: f64,
    pub window: Vec<f64>,
    pub length_scale: f64,
    pub dropped_finite_part: f64,
    pub stability_gap: f64,
}

struct Solved {
    coeffs: Vec<f64>,
    residual: f64,
    condition: f64,
}

fn solve(samples: &[CutoffSample], template: &DivergenceTemplate, len: f64) -> Result<Solved> {
    let mut powers: Vec<Option<i32>> = template
        .divergent
        .iter()
        .filter(|d| d.coefficient == Coefficient::Free)
        .map(|d| Some(d.power))
        .collect();
    powers.push(Some(0));
    // None marks the τ ln τ column
    if template.include_log_linear {
        powers.push(None);
    }
    powers.extend(template.slack_powers.iter().map(|&p| Some(p)));

    let n = samples.len();
    let k = powers.len();
    // rows scaled by τ^{-p_min} so every equation is O(1)
    let leading = template.divergent.first().map_or(0, |d| -d.power);
    let row_weight = |i: usize| (samples[i].t / len).powi(leading);
    let mut a = DMatrix::from_fn(n, k, |i, j| {
        let tau = samples[i].t / len;
        row_weight(i)
            * match powers[j] {
                Some(p) => tau.powi(p),
                None => tau * tau.ln(),
            }
    });
    let y = DVector::from_fn(n, |i, _| {
        let t = samples[i].t;
        let fixed: f64 = template
            .divergent
            .iter()
            .filter_map(|d| match d.coefficient {
                Coefficient::Fixed(c) => Some(c * t.powi(d.power)),
                Coefficient::Free => None,
            })
            .sum();
        (samples[i].energy - fixed) * len * row_weight(i)
    });

    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let scaled = svd.solve(&y, 0.0).map_err(|e| Error::UnreliableFit {
        reason: e.to_string(),
        condition,
        residual: f64::NAN,
    })?;
    let fitted = &a * &scaled;
    let ymax = y.amax();
    let residual = if ymax > 0.0 { (&y - fitted).amax() / ymax } else { 0.0 };
    let coeffs = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok(Solved {
        coeffs,
        residual,
        condition,
    })
}

/// Fits the template to samples on a decreasing cutoff ladder and returns the
/// `t⁰` coefficient, after checking conditioning, residual and stability
/// under removal of the largest cutoff.
pub fn extract_finite_part(
    samples: &[CutoffSample],
    template: &DivergenceTemplate,
    options: &FitOptions,
) -> Result<FinitePartFit> {
    let needed = template.free_count() + 2;
    if samples.len() < needed {
        return Err(Error::invalid(format!(
            "template needs at least {needed} samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !(s.t > 0.0 && s.t.is_finite() && s.energy.is_finite()))
    {
        return Err(Error::invalid("samples must have positive cutoffs and finite energies"));
    }
    if samples.windows(2).any(|w| w[1].t >= w[0].t) {
        return Err(Error::invalid("cutoff ladder must be strictly decreasing"));
    }
    let len = match options.length_scale {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::invalid(format!("length scale {l} must be positive"))),
        None => samples[0].t,
    };

    let full = solve(samples, template, len)?;
    let free_div = template
        .divergent
        .iter()
        .filter(|d| d.coefficient == Coefficient::Free)
        .count();
    let finite_part = full.coeffs[free_div] / len;
    if !(full.condition <= options.max_condition) {
        return Err(Error::UnreliableFit {
            reason: "design matrix ill-conditioned".into(),
            condition: full.condition,
            residual: full.residual,
        });
    }
    if !(full.residual <= options.max_residual) {
        return Err(Error::UnreliableFit {
            reason: "residual above threshold".into(),
            condition: full.condition,
            residual: full.residual,
        });
    }

    let dropped = solve(&samples[1..], template, len)?;
    let dropped_finite_part = dropped.coeffs[free_div] / len;
    let stability_gap = (finite_part - dropped_finite_part).abs();
    let tolerance = options.stability_rel * finite_part.abs().max(1.0 / len);
    if !(stability_gap <= tolerance) {
        return Err(Error::Instability {
            finite_part,
            dropped: dropped_finite_part,
            gap: stability_gap,
            tolerance,
        });
    }

    let mut column = full.coeffs.iter();
    let mut divergent_coeffs = Vec::with_capacity(template.divergent.len());
    for d in &template.divergent {
        divergent_coeffs.push(match d.coefficient {
            Coefficient::Fixed(c) => FittedTerm {
                power: d.power,
                value: c,
                fixed: true,
            },
            Coefficient::Free => FittedTerm {
                power: d.power,
                value: column.next().copied().unwrap_or(f64::NAN) * len.powi(-d.power - 1),
                fixed: false,
            },
        });
    }
    column.next();
    let log_linear = template
        .include_log_linear
        .then(|| column.next().copied().unwrap_or(f64::NAN) / len);
    let slack_coeffs = template
        .slack_powers
        .iter()
        .map(|&power| FittedTerm {
            power,
            value: column.next().copied().unwrap_or(f64::NAN) * len.powi(-power - 1),
            fixed: false,
        })
        .collect();

    Ok(FinitePartFit {
        finite_part,
        divergent_coeffs,
        log_linear,
        slack_coeffs,
        residual: full.residual,
        condition: full.condition,
        window: samples.iter().map(|s| s.t).collect(),
        length_scale: len,
        dropped_finite_part,
        stability_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synth(times: &[f64], f: impl Fn(f64) -> f64) -> Vec<CutoffSample> {
        times
            .iter()
            .map(|&t| CutoffSample {
                t,
                trace: 0.0,
                energy: f(t),
                trace_bound: 0.0,
                energy_bound: 0.0,
            })
            .collect()
    }

    fn ladder(t0: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
    }

    #[test]
    fn rejects_bad_templates() {
        let term = |power| DivergentTerm {
            power,
            coefficient: Coefficient::Free,
        };
        assert!(DivergenceTemplate::new(vec![term(0)], false, vec![]).is_err());
        assert!(DivergenceTemplate::new(vec![term(-2), term(-4)], false, vec![]).is_err());
        assert!(DivergenceTemplate::new(vec![term(-2)], false, vec![2, 2]).is_err());
        assert!(DivergenceTemplate::new(vec![term(-2)], false, vec![-1]).is_err());
    }

    #[test]
    fn too_few_samples() {
        let s = synth(&ladder(0.2, 5), |t| 1.0 / t / t);
        assert!(matches!(
            extract_finite_part(&s, &DivergenceTemplate::one_dimensional(), &FitOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn increasing_ladder_rejected() {
        let mut times = ladder(0.2, 8);
        times.reverse();
        let s = synth(&times, |t| 1.0 / t / t);
        assert!(extract_finite_part(&s, &DivergenceTemplate::one_dimensional(), &FitOptions::default()).is_err());
    }

    #[test]
    fn detects_missing_term() {
        // a t⁻³ term the template cannot absorb
        let s = synth(&ladder(0.5, 8), |t| 1.0 / t.powi(3) + 0.3 / (t * t) + 0.1);
        let r = extract_finite_part(&s, &DivergenceTemplate::one_dimensional(), &FitOptions::default());
        assert!(
            matches!(r, Err(Error::UnreliableFit { .. }) | Err(Error::Instability { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn fixed_coefficient_is_subtracted() {
        let s = synth(&ladder(0.2, 5), |t| 0.25 / (t * t) - 0.7 + 0.1 * t * t);
        let fit = extract_finite_part(
            &s,
            &DivergenceTemplate::with_weyl(0.25).unwrap(),
            &FitOptions::default(),
        )
        .unwrap();
        assert!((fit.finite_part + 0.7).abs() < 1e-12);
        assert!(fit.divergent_coeffs[0].fixed);
    }

    #[test]
    fn box_template_recovers_all_coefficients() {
        let s = synth(&ladder(0.5, 8), |t| {
            2.0 / t.powi(4) - 0.4 / (t * t) + 0.09 + 0.02 * t * t - 0.001 * t.powi(4)
        });
        let opts = FitOptions {
            length_scale: Some(1.0),
            ..FitOptions::default()
        };
        let fit = extract_finite_part(&s, &DivergenceTemplate::box_default(), &opts).unwrap();
        assert!((fit.finite_part - 0.09).abs() < 1e-11);
        assert!((fit.divergent_coeffs[0].value - 2.0).abs() < 1e-12);
        assert!((fit.divergent_coeffs[1].value + 0.4).abs() < 1e-11);
        assert!((fit.slack_coeffs[1].value + 0.001).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn exact_recovery_on_synthetic_energy(
            c2 in 0.01f64..10.0,
            e0 in -5.0f64..5.0,
            s2 in -1.0f64..1.0,
            s4 in -1.0f64..1.0,
            len in 0.1f64..10.0,
        ) {
            let f = |t: f64| c2 / (t * t) + e0 / len + s2 * t * t / len.powi(3) + s4 * t.powi(4) / len.powi(5);
            let s = synth(&ladder(len / 5.0, 8), f);
            let opts = FitOptions { length_scale: Some(len), ..FitOptions::default() };
            let fit = extract_finite_part(&s, &DivergenceTemplate::one_dimensional(), &opts).unwrap();
            prop_assert!((fit.finite_part - e0 / len).abs() <= 1e-9 * (1.0 + e0.abs()) / len);
            prop_assert!((fit.divergent_coeffs[0].value - c2).abs() <= 1e-9 * c2.max(1.0));
            prop_assert!(fit.stability_gap <= 1e-9 / len);
        }

        #[test]
        fn recovery_is_scale_free(c2 in 0.1f64..2.0, e0 in -1.0f64..1.0, lambda in 0.2f64..5.0) {
            let fit_at = |len: f64| {
                let s = synth(&ladder(len / 5.0, 8), |t| c2 * len / (t * t) + e0 / len);
                let opts = FitOptions { length_scale: Some(len), ..FitOptions::default() };
                extract_finite_part(&s, &DivergenceTemplate::one_dimensional(), &opts).unwrap().finite_part
            };
            let base = fit_at(1.0);
            prop_assert!((fit_at(lambda) * lambda - base).abs() <= 1e-9);
        }
    }
}
