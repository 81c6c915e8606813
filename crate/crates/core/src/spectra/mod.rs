//! Eigenfrequency spectra for intervals, Kirchhoff star graphs and
//! perfectly conducting rectangular cavities.
//!
//! Every spectrum is complete up to its `omega_max` ceiling and carries a
//! [`WeylTail`] describing the mode density above it, so downstream sums can
//! bound what the truncation threw away.

mod em_box;
mod interval;
mod star;
mod text;

pub use em_box::{box_em_spectrum, box_em_spectrum_with_budget, DEFAULT_MODE_BUDGET};
pub use interval::interval_spectrum;
pub use star::{star_secular_function, star_spectrum, star_spectrum_with, RootOptions, StarSolver};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn letter(self) -> char {
        match self {
            BoundaryCondition::Dirichlet => 'D',
            BoundaryCondition::Neumann => 'N',
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Dirichlet => f.write_str("dirichlet"),
            BoundaryCondition::Neumann => f.write_str("neumann"),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "n" | "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::invalid(format!("unknown boundary condition '{other}'"))),
        }
    }
}

pub(crate) fn check_length(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// A 1-D cavity of length `a` with a condition at each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalSpec {
    length: f64,
    left: BoundaryCondition,
    right: BoundaryCondition,
}

impl IntervalSpec {
    pub fn new(length: f64, left: BoundaryCondition, right: BoundaryCondition) -> Result<Self> {
        check_length("interval length", length)?;
        Ok(Self { length, left, right })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn left(&self) -> BoundaryCondition {
        self.left
    }

    pub fn right(&self) -> BoundaryCondition {
        self.right
    }

    pub fn is_mixed(&self) -> bool {
        self.left != self.right
    }

    /// Two-letter code such as `DN`.
    pub fn code(&self) -> String {
        format!("{}{}", self.left.letter(), self.right.letter())
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(length, self.left, self.right)
    }
}

/// `N` edges meeting at a Kirchhoff vertex, each closed at its far end by a
/// piston with the same boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarGraphSpec {
    edge_lengths: Vec<f64>,
    piston: BoundaryCondition,
}

impl StarGraphSpec {
    pub fn new(edge_lengths: Vec<f64>, piston: BoundaryCondition) -> Result<Self> {
        if edge_lengths.is_empty() {
            return Err(Error::invalid("a star graph needs at least one edge"));
        }
        for &a in &edge_lengths {
            check_length("edge length", a)?;
        }
        Ok(Self { edge_lengths, piston })
    }

    pub fn equal(edges: usize, length: f64, piston: BoundaryCondition) -> Result<Self> {
        Self::new(vec![length; edges], piston)
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn edges(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn piston(&self) -> BoundaryCondition {
        self.piston
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    pub fn min_length(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The common edge length when every edge has the same length.
    pub fn common_length(&self) -> Option<f64> {
        let first = self.edge_lengths[0];
        self.edge_lengths.iter().all(|&a| a == first).then_some(first)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.edge_lengths.iter().map(|a| a * factor).collect(), self.piston)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WallModel {
    /// Every face perfectly conducting.
    AllConducting,
    /// The face at distance `a` infinitely permeable, the rest conducting.
    PermeablePiston,
}

impl fmt::Display for WallModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WallModel::AllConducting => f.write_str("conducting"),
            WallModel::PermeablePiston => f.write_str("permeable"),
        }
    }
}

impl FromStr for WallModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conducting" | "all-conducting" => Ok(WallModel::AllConducting),
            "permeable" | "permeable-piston" => Ok(WallModel::PermeablePiston),
            other => Err(Error::invalid(format!("unknown wall model '{other}'"))),
        }
    }
}

/// Rectangular cavity `a × b1 × b2`; `a` is the piston coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSpec {
    a: f64,
    b1: f64,
    b2: f64,
    wall: WallModel,
}

impl BoxSpec {
    pub fn new(a: f64, b1: f64, b2: f64, wall: WallModel) -> Result<Self> {
        check_length("box side a", a)?;
        check_length("box side b1", b1)?;
        check_length("box side b2", b2)?;
        Ok(Self { a, b1, b2, wall })
    }

    pub fn conducting(a: f64, b1: f64, b2: f64) -> Result<Self> {
        Self::new(a, b1, b2, WallModel::AllConducting)
    }

    pub fn sides(&self) -> [f64; 3] {
        [self.a, self.b1, self.b2]
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn wall(&self) -> WallModel {
        self.wall
    }

    pub fn volume(&self) -> f64 {
        self.a * self.b1 * self.b2
    }

    pub fn min_side(&self) -> f64 {
        self.a.min(self.b1).min(self.b2)
    }

    pub fn max_side(&self) -> f64 {
        self.a.max(self.b1).max(self.b2)
    }

    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(a, self.b1, self.b2, self.wall)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.a * factor, self.b1 * factor, self.b2 * factor, self.wall)
    }
}

/// The geometry a spectrum belongs to; round-trips through the text header tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Geometry {
    Interval(IntervalSpec),
    Star(StarGraphSpec),
    Box(BoxSpec),
}

impl Geometry {
    /// Smallest length scale, used to place the cutoff ladder.
    pub fn min_length(&self) -> f64 {
        match self {
            Geometry::Interval(s) => s.length(),
            Geometry::Star(s) => s.min_length(),
            Geometry::Box(s) => s.min_side(),
        }
    }

    pub fn tail(&self) -> WeylTail {
        match self {
            Geometry::Interval(s) => {
                let a = s.length();
                let constant = match (s.left(), s.right()) {
                    (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet) => -0.5,
                    (BoundaryCondition::Neumann, BoundaryCondition::Neumann) => 0.5,
                    _ => 0.0,
                };
                // count(ω) <= aω/π + 1
                WeylTail {
                    dimension: 1,
                    counting: vec![constant, a / PI],
                    envelope_scale: a / PI,
                    envelope_shift: PI / a,
                }
            }
            Geometry::Star(s) => {
                let total = s.total_length();
                let slack = s.edges() as f64 + 2.0;
                WeylTail {
                    dimension: 1,
                    counting: vec![0.0, total / PI],
                    envelope_scale: total / PI,
                    envelope_shift: slack * PI / total,
                }
            }
            Geometry::Box(s) => {
                let [a, b1, b2] = s.sides();
                let volume = s.volume();
                let (constant, edge) = match s.wall() {
                    WallModel::AllConducting => (0.5, -(a + b1 + b2) / (2.0 * PI)),
                    WallModel::PermeablePiston => (0.0, -a / (2.0 * PI)),
                };
                let shift = PI * (1.0 / (a * a) + 1.0 / (b1 * b1) + 1.0 / (b2 * b2)).sqrt();
                WeylTail {
                    dimension: 3,
                    counting: vec![constant, edge, 0.0, volume / (3.0 * PI * PI)],
                    envelope_scale: volume / (3.0 * PI * PI),
                    envelope_shift: shift,
                }
            }
        }
    }
}

/// Asymptotic mode density above the enumeration ceiling.
///
/// `counting[k]` is the coefficient of `ω^k` in the smooth Weyl counting law.
/// The envelope `scale·(ω + shift)^dimension` is a rigorous upper bound on the
/// mode count (with multiplicity) below `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylTail {
    pub dimension: u32,
    pub counting: Vec<f64>,
    pub envelope_scale: f64,
    pub envelope_shift: f64,
}

impl WeylTail {
    pub fn leading_coefficient(&self) -> f64 {
        self.counting[self.dimension as usize]
    }

    pub fn smooth_count(&self, omega: f64) -> f64 {
        self.counting.iter().rev().fold(0.0, |acc, &c| acc * omega + c)
    }

    pub fn envelope(&self, omega: f64) -> f64 {
        self.envelope_scale * (omega + self.envelope_shift).powi(self.dimension as i32)
    }

    /// Leading divergent term of the cutoff energy, `½ d·d!·c_d / t^{d+1}`.
    pub fn leading_energy(&self, t: f64) -> f64 {
        let d = self.dimension as i32;
        0.5 * f64::from(self.dimension) * factorial(self.dimension) * self.leading_coefficient() / t.powi(d + 1)
    }

    pub fn leading_trace(&self, t: f64) -> f64 {
        factorial(self.dimension) * self.leading_coefficient() / t.powi(self.dimension as i32)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub omega: f64,
    pub multiplicity: u32,
    /// Set only on the ω = 0 constant mode.
    pub zero_mode: bool,
}

impl Mode {
    pub fn new(omega: f64, multiplicity: u32) -> Self {
        Self {
            omega,
            multiplicity,
            zero_mode: omega == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    geometry: Geometry,
    modes: Vec<Mode>,
    omega_max: f64,
    tail: WeylTail,
}

impl Spectrum {
    /// Validates ordering, multiplicities and the ceiling.
    pub fn new(geometry: Geometry, modes: Vec<Mode>, omega_max: f64) -> Result<Self> {
        check_length("omega_max", omega_max)?;
        let mut previous: Option<f64> = None;
        for m in &modes {
            if !(m.omega.is_finite() && m.omega >= 0.0) {
                return Err(Error::invalid(format!(
                    "mode frequency {} is not a nonnegative number",
                    m.omega
                )));
            }
            if m.omega > omega_max {
                return Err(Error::invalid(format!(
                    "mode {} exceeds omega_max {omega_max}",
                    m.omega
                )));
            }
            if m.multiplicity == 0 {
                return Err(Error::invalid(format!("mode {} has zero multiplicity", m.omega)));
            }
            if m.zero_mode != (m.omega == 0.0) {
                return Err(Error::invalid(format!(
                    "zero-mode flag inconsistent at omega={}",
                    m.omega
                )));
            }
            if let Some(p) = previous {
                if m.omega <= p {
                    return Err(Error::invalid(format!(
                        "frequencies must be strictly increasing ({p} then {})",
                        m.omega
                    )));
                }
            }
            previous = Some(m.omega);
        }
        let tail = geometry.tail();
        Ok(Self {
            geometry,
            modes,
            omega_max,
            tail,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn tail(&self) -> &WeylTail {
        &self.tail
    }

    /// Number of modes with multiplicity and `omega <= bound`.
    pub fn count_below(&self, bound: f64) -> u64 {
        self.modes
            .iter()
            .take_while(|m| m.omega <= bound)
            .map(|m| u64::from(m.multiplicity))
            .sum()
    }

    pub fn total_count(&self) -> u64 {
        self.count_below(f64::INFINITY)
    }

    /// The frequencies repeated by multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.omega, m.multiplicity as usize))
            .collect()
    }

    pub fn has_zero_mode(&self) -> bool {
        self.modes.first().is_some_and(|m| m.zero_mode)
    }
}

/// Merge sorted `(omega, multiplicity)` pairs whose frequencies agree within
/// `abs_tol + rel_tol·ω`.
pub(crate) fn merge_sorted(raw: &mut [(f64, u32)], abs_tol: f64, rel_tol: f64) -> Vec<Mode> {
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<Mode> = Vec::with_capacity(raw.len());
    for &(omega, mult) in raw.iter() {
        match merged.last_mut() {
            Some(last) if omega - last.omega <= abs_tol + rel_tol * omega => {
                last.multiplicity += mult;
            }
            _ => merged.push(Mode::new(omega, mult)),
        }
    }
    merged
}
