//! Kirchhoff star graphs.
//!
//! With `u_j(x) = B_j cos(ω(x − a_j))` on edge `j` (Neumann pistons), vertex
//! continuity and the zero-current condition reduce to `Σ_j tan(ω a_j) = 0`.
//! Multiplying through by `Π_k cos(ω a_k)` gives the pole-free secular function
//! `Σ_j sin(ω a_j) Π_{k≠j} cos(ω a_k)`. Dirichlet pistons swap sin and cos.
//!
//! `Σ tan(ω a_j)` is strictly increasing between consecutive poles, so every
//! gap between distinct poles holds exactly one simple eigenvalue. A pole
//! shared by `m` edges is itself an eigenvalue of multiplicity `m − 1`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{check_length, BoundaryCondition, Geometry, Mode, Spectrum, StarGraphSpec};
use crate::error::{Error, Result};

/// How `star_spectrum_with` obtains the eigenfrequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum StarSolver {
    /// Closed form for equal edge lengths, root finder otherwise.
    #[default]
    Auto,
    /// Always bracket and bisect, even when the closed form applies.
    RootFinder,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RootOptions {
    /// Poles closer than this (absolute) are treated as one degenerate pole.
    pub cluster_tol: f64,
    /// Absolute bisection tolerance.
    pub bisect_tol: f64,
    pub max_iter: usize,
    pub solver: StarSolver,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-8,
            bisect_tol: 1e-12,
            max_iter: 200,
            solver: StarSolver::Auto,
        }
    }
}

/// Pole-free secular function whose zeros are the star eigenfrequencies.
pub fn star_secular_function(spec: &StarGraphSpec, omega: f64) -> Result<f64> {
    check_length("omega", omega)?;
    Ok(secular(spec.edge_lengths(), spec.piston(), omega))
}

fn secular(lengths: &[f64], piston: BoundaryCondition, omega: f64) -> f64 {
    let (own, other): (fn(f64) -> f64, fn(f64) -> f64) = match piston {
        BoundaryCondition::Neumann => (f64::sin, f64::cos),
        BoundaryCondition::Dirichlet => (f64::cos, f64::sin),
    };
    let n = lengths.len();
    let others: Vec<f64> = lengths.iter().map(|&a| other(omega * a)).collect();
    // prefix[j] = Π_{k<j} others[k]
    let mut prefix = vec![1.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] * others[j];
    }
    let mut suffix = 1.0;
    let mut total = 0.0;
    for j in (0..n).rev() {
        total += own(omega * lengths[j]) * prefix[j] * suffix;
        suffix *= others[j];
    }
    total
}

pub fn star_spectrum(spec: &StarGraphSpec, omega_max: f64) -> Result<Spectrum> {
    star_spectrum_with(spec, omega_max, &RootOptions::default())
}

pub fn star_spectrum_with(spec: &StarGraphSpec, omega_max: f64, options: &RootOptions) -> Result<Spectrum> {
    check_length("omega_max", omega_max)?;
    let modes = match (options.solver, spec.common_length()) {
        (StarSolver::Auto, Some(a)) => equal_length_modes(spec.edges(), a, spec.piston(), omega_max),
        _ => solve_modes(spec, omega_max, options)?,
    };
    Spectrum::new(Geometry::Star(spec.clone()), modes, omega_max)
}

/// The two mode families of an equal-length star, on the grid `kπ/2a`.
fn equal_length_modes(edges: usize, a: f64, piston: BoundaryCondition, omega_max: f64) -> Vec<Mode> {
    let degenerate = (edges - 1) as u32;
    let mut modes = Vec::new();
    if piston == BoundaryCondition::Neumann {
        modes.push(Mode::new(0.0, 1));
    }
    for k in 1u64.. {
        let omega = k as f64 * PI / (2.0 * a);
        if omega > omega_max {
            break;
        }
        let even = k % 2 == 0;
        let multiplicity = match (piston, even) {
            (BoundaryCondition::Neumann, true) | (BoundaryCondition::Dirichlet, false) => 1,
            _ => degenerate,
        };
        if multiplicity > 0 {
            modes.push(Mode::new(omega, multiplicity));
        }
    }
    modes
}

#[derive(Debug, Clone, Copy)]
struct PoleCluster {
    position: f64,
    edges: u32,
}

fn pole_clusters(spec: &StarGraphSpec, omega_max: f64, cluster_tol: f64) -> Vec<PoleCluster> {
    let offset = match spec.piston() {
        BoundaryCondition::Neumann => 0.5,
        BoundaryCondition::Dirichlet => 1.0,
    };
    let mut poles = Vec::new();
    for &a in spec.edge_lengths() {
        // one pole past the ceiling closes the last gap
        for n in 0u64.. {
            let p = (n as f64 + offset) * PI / a;
            poles.push(p);
            if p > omega_max {
                break;
            }
        }
    }
    poles.sort_by(f64::total_cmp);

    let mut clusters: Vec<(f64, f64, u32)> = Vec::new(); // (first, sum, count)
    for p in poles {
        match clusters.last_mut() {
            Some((first, sum, count)) if p - *first <= cluster_tol => {
                *sum += p;
                *count += 1;
            }
            _ => clusters.push((p, p, 1)),
        }
    }
    let mut out: Vec<PoleCluster> = clusters
        .into_iter()
        .map(|(_, sum, count)| PoleCluster {
            position: sum / f64::from(count),
            edges: count,
        })
        .collect();
    if let Some(cut) = out.iter().position(|c| c.position > omega_max) {
        out.truncate(cut + 1);
    }
    out
}

fn solve_modes(spec: &StarGraphSpec, omega_max: f64, options: &RootOptions) -> Result<Vec<Mode>> {
    let piston = spec.piston();
    let clusters = pole_clusters(spec, omega_max, options.cluster_tol);

    let mut gaps: Vec<(f64, f64)> = clusters.windows(2).map(|w| (w[0].position, w[1].position)).collect();
    if piston == BoundaryCondition::Dirichlet {
        // Σ cot(ω a_j) runs from +∞ at ω = 0⁺ to −∞ at the first pole.
        if let Some(first) = clusters.first() {
            gaps.insert(0, (0.0, first.position));
        }
    }

    let roots: Vec<f64> = gaps
        .par_iter()
        .map(|&(lo, hi)| bisect_gap(spec.edge_lengths(), piston, lo, hi, options))
        .collect::<Result<_>>()?;

    let mut modes = Vec::with_capacity(roots.len() + clusters.len() + 1);
    if piston == BoundaryCondition::Neumann {
        modes.push(Mode::new(0.0, 1));
    }
    let mut roots = roots.into_iter().peekable();
    for c in &clusters {
        while let Some(&r) = roots.peek() {
            if r < c.position {
                modes.push(Mode::new(r, 1));
                roots.next();
            } else {
                break;
            }
        }
        if c.edges >= 2 {
            modes.push(Mode::new(c.position, c.edges - 1));
        }
    }
    modes.extend(roots.map(|r| Mode::new(r, 1)));
    modes.retain(|m| m.omega <= omega_max);
    Ok(modes)
}

/// Bisect for the single root of the secular function in the open gap.
fn bisect_gap(lengths: &[f64], piston: BoundaryCondition, lo: f64, hi: f64, options: &RootOptions) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    // Sign of the factor that was multiplied in to clear the poles; constant
    // on the open gap.
    let cleared_sign = lengths
        .iter()
        .map(|&a| match piston {
            BoundaryCondition::Neumann => (mid * a).cos(),
            BoundaryCondition::Dirichlet => (mid * a).sin(),
        })
        .fold(1.0, |s, v| s * v.signum());
    // Σ tan rises through its root, Σ cot falls through it.
    let rising = piston == BoundaryCondition::Neumann;

    let (mut a, mut b) = (lo, hi);
    for _ in 0..options.max_iter {
        let m = 0.5 * (a + b);
        if b - a <= options.bisect_tol || m <= a || m >= b {
            return Ok(m);
        }
        let g = secular(lengths, piston, m) * cleared_sign;
        if g == 0.0 {
            return Ok(m);
        }
        if (g < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }
    Err(Error::NumericalFailure {
        lo: a,
        hi: b,
        iterations: options.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::BoundaryCondition::{Dirichlet as D, Neumann as N};

    fn forced() -> RootOptions {
        RootOptions {
            solver: StarSolver::RootFinder,
            ..RootOptions::default()
        }
    }

    #[test]
    fn two_equal_edges_reduce_to_sin_2w() {
        let spec = StarGraphSpec::equal(2, 1.0, N).unwrap();
        for &w in &[0.3, 1.1, 2.5, 7.0] {
            let f = star_secular_function(&spec, w).unwrap();
            assert!((f - (2.0 * w).sin()).abs() < 1e-14, "w={w}");
        }
        for n in 1..8 {
            let w = n as f64 * PI / 2.0;
            assert!(star_secular_function(&spec, w).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn three_equal_edges_vanish_at_pi() {
        let spec = StarGraphSpec::equal(3, 1.0, N).unwrap();
        assert!(star_secular_function(&spec, PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn secular_rejects_nonpositive_frequency() {
        let spec = StarGraphSpec::equal(3, 1.0, N).unwrap();
        assert!(star_secular_function(&spec, 0.0).is_err());
    }

    #[test]
    fn four_edge_star_families() {
        let spec = StarGraphSpec::equal(4, 1.0, N).unwrap();
        let s = star_spectrum(&spec, 4.0 * PI / 2.0 + 1e-9).unwrap();
        let got: Vec<(f64, u32)> = s.modes().iter().map(|m| (m.omega, m.multiplicity)).collect();
        let want = vec![(0.0, 1), (PI / 2.0, 3), (PI, 1), (3.0 * PI / 2.0, 3), (2.0 * PI, 1)];
        assert_eq!(got.len(), want.len());
        for ((w, m), (ew, em)) in got.iter().zip(&want) {
            assert!((w - ew).abs() < 1e-14);
            assert_eq!(m, em);
        }
        assert!(s.modes()[0].zero_mode);
    }

    #[test]
    fn root_finder_matches_closed_form_at_equal_lengths() {
        for piston in [N, D] {
            for edges in 1..=6 {
                let spec = StarGraphSpec::equal(edges, 1.3, piston).unwrap();
                let closed = star_spectrum(&spec, 200.0).unwrap();
                let solved = star_spectrum_with(&spec, 200.0, &forced()).unwrap();
                assert_eq!(closed.modes().len(), solved.modes().len(), "N={edges} {piston}");
                for (c, s) in closed.modes().iter().zip(solved.modes()) {
                    assert_eq!(c.multiplicity, s.multiplicity);
                    assert!((c.omega - s.omega).abs() <= 1e-10 * c.omega.max(1.0));
                }
            }
        }
    }

    #[test]
    fn dirichlet_star_has_no_zero_mode() {
        let spec = StarGraphSpec::new(vec![1.0, 1.3, 1.7], D).unwrap();
        let s = star_spectrum(&spec, 20.0).unwrap();
        assert!(!s.has_zero_mode());
        assert!(s.modes()[0].omega > 0.0);
    }

    #[test]
    fn unequal_roots_are_secular_zeros() {
        let spec = StarGraphSpec::new(vec![1.0, 1.3, 1.7], N).unwrap();
        let s = star_spectrum(&spec, 50.0).unwrap();
        for m in s.modes().iter().filter(|m| !m.zero_mode) {
            let f = star_secular_function(&spec, m.omega).unwrap();
            assert!(f.abs() < 1e-10, "f({})={f}", m.omega);
        }
    }

    #[test]
    fn partially_degenerate_poles() {
        // Edges 1 and 3 share the pole at π/2 (and 3π/2, ...): multiplicity 1.
        let spec = StarGraphSpec::new(vec![1.0, 3.0, 2.2], N).unwrap();
        let s = star_spectrum(&spec, 1.7).unwrap();
        let at_half_pi = s
            .modes()
            .iter()
            .find(|m| (m.omega - PI / 2.0).abs() < 1e-9)
            .expect("shared pole is an eigenvalue");
        assert_eq!(at_half_pi.multiplicity, 1);
    }
}
