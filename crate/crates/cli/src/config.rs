//! Scenario configuration shared by the TOML file and the command line.

use std::path::PathBuf;
use std::str::FromStr;

use pistonlab::regular::{Ladder, PipelineOptions};
use pistonlab::spectra::{BoundaryCondition, WallModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Interval,
    Star,
    Box,
    Piston3d,
    PaperSuite,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Interval => "interval",
            ScenarioKind::Star => "star",
            ScenarioKind::Box => "box",
            ScenarioKind::Piston3d => "piston3d",
            ScenarioKind::PaperSuite => "paper-suite",
        }
    }

    /// Geometry keys meaningful for this scenario.
    pub fn allowed(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Interval => &["bc", "a", "force", "spectrum_ceiling"],
            ScenarioKind::Star => &[
                "n",
                "a",
                "lengths",
                "piston",
                "shaft_length",
                "root_finder",
                "force",
                "spectrum_ceiling",
            ],
            ScenarioKind::Box => &["a", "b", "b1", "b2", "wall", "force", "spectrum_ceiling"],
            ScenarioKind::Piston3d => &["a", "b", "shaft_length"],
            ScenarioKind::PaperSuite => &[],
        }
    }

    /// Names accepted by `sweep --param`.
    pub fn sweep_params(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Interval => &["a"],
            ScenarioKind::Star => &["a", "n", "shaft_length"],
            ScenarioKind::Box => &["a", "b", "b1", "b2", "aspect"],
            ScenarioKind::Piston3d => &["a", "b", "shaft_length", "aspect"],
            ScenarioKind::PaperSuite => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// Pair of end conditions written as two letters, e.g. `DN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EndPair(pub BoundaryCondition, pub BoundaryCondition);

impl FromStr for EndPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(l), Some(r), None) => {
                let parse = |c: char| c.to_string().parse::<BoundaryCondition>().map_err(|e| e.to_string());
                Ok(EndPair(parse(l)?, parse(r)?))
            }
            _ => Err(format!("boundary pair must be two letters from D/N, got '{s}'")),
        }
    }
}

impl TryFrom<String> for EndPair {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<EndPair> for String {
    fn from(p: EndPair) -> String {
        format!("{}{}", p.0.letter(), p.1.letter())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// End conditions of an interval, e.g. DN
    #[arg(long, env = "PISTONLAB_BC")]
    pub bc: Option<EndPair>,
    /// Piston position (interval length, star edge length, box side a)
    #[arg(long, env = "PISTONLAB_A")]
    pub a: Option<f64>,
    /// Number of star edges
    #[arg(long, env = "PISTONLAB_N")]
    pub n: Option<usize>,
    /// Unequal star edge lengths, comma separated
    #[arg(long, env = "PISTONLAB_LENGTHS", value_delimiter = ',')]
    pub lengths: Option<Vec<f64>>,
    /// Star piston condition (N or D)
    #[arg(long, env = "PISTONLAB_PISTON")]
    #[serde(default, with = "bc_opt")]
    pub piston: Option<BoundaryCondition>,
    /// Full shaft length L
    #[arg(long, env = "PISTONLAB_SHAFT_LENGTH")]
    pub shaft_length: Option<f64>,
    /// Square cross-section side (sets b1 = b2)
    #[arg(long, env = "PISTONLAB_B")]
    pub b: Option<f64>,
    #[arg(long, env = "PISTONLAB_B1")]
    pub b1: Option<f64>,
    #[arg(long, env = "PISTONLAB_B2")]
    pub b2: Option<f64>,
    /// conducting or permeable
    #[arg(long, env = "PISTONLAB_WALL")]
    #[serde(default, with = "wall_opt")]
    pub wall: Option<WallModel>,
    /// Also compute the piston force
    #[arg(long, env = "PISTONLAB_FORCE", num_args = 0..=1, default_missing_value = "true")]
    pub force: Option<bool>,
    /// Solve the star secular equation even for equal lengths
    #[arg(long, env = "PISTONLAB_ROOT_FINDER", num_args = 0..=1, default_missing_value = "true")]
    pub root_finder: Option<bool>,
    /// Ceiling for --spectrum-out
    #[arg(long, env = "PISTONLAB_SPECTRUM_CEILING")]
    pub spectrum_ceiling: Option<f64>,
}

mod bc_opt {
    use pistonlab::spectra::BoundaryCondition;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BoundaryCondition>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(bc) => s.serialize_some(&bc.letter().to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BoundaryCondition>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

mod wall_opt {
    use pistonlab::spectra::WallModel;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<WallModel>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(w) => s.serialize_some(&w.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<WallModel>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

impl GeometryConfig {
    /// Names of the keys that are set.
    pub fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! check {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { keys.push(stringify!($field)); })*
            };
        }
        check!(
            bc,
            a,
            n,
            lengths,
            piston,
            shaft_length,
            b,
            b1,
            b2,
            wall,
            force,
            root_finder,
            spectrum_ceiling
        );
        keys
    }

    /// Unsets one key by name; unknown names are ignored.
    pub fn clear(&mut self, key: &str) {
        macro_rules! clear {
            ($($field:ident),*) => {
                match key {
                    $(stringify!($field) => self.$field = None,)*
                    _ => {}
                }
            };
        }
        clear!(
            bc,
            a,
            n,
            lengths,
            piston,
            shaft_length,
            b,
            b1,
            b2,
            wall,
            force,
            root_finder,
            spectrum_ceiling
        );
    }

    /// Field-wise `self` over `base`.
    pub fn overlay(self, base: GeometryConfig) -> GeometryConfig {
        GeometryConfig {
            bc: self.bc.or(base.bc),
            a: self.a.or(base.a),
            n: self.n.or(base.n),
            lengths: self.lengths.or(base.lengths),
            piston: self.piston.or(base.piston),
            shaft_length: self.shaft_length.or(base.shaft_length),
            b: self.b.or(base.b),
            b1: self.b1.or(base.b1),
            b2: self.b2.or(base.b2),
            wall: self.wall.or(base.wall),
            force: self.force.or(base.force),
            root_finder: self.root_finder.or(base.root_finder),
            spectrum_ceiling: self.spectrum_ceiling.or(base.spectrum_ceiling),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// First cutoff as a fraction of the smallest length
    #[arg(long, env = "PISTONLAB_T0_FRACTION", global = true)]
    pub t0_fraction: Option<f64>,
    /// Number of cutoff rungs
    #[arg(long, env = "PISTONLAB_RUNGS", global = true)]
    pub rungs: Option<usize>,
    /// Explicit cutoff ladder, comma separated and decreasing
    #[arg(long, env = "PISTONLAB_LADDER", global = true, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    /// Tail bound relative to the leading divergent term
    #[arg(long, env = "PISTONLAB_TAIL_REL", global = true)]
    pub tail_rel: Option<f64>,
    #[arg(long, env = "PISTONLAB_MAX_RESIDUAL", global = true)]
    pub max_residual: Option<f64>,
    #[arg(long, env = "PISTONLAB_MAX_CONDITION", global = true)]
    pub max_condition: Option<f64>,
    /// Allowed finite-part change when the largest cutoff is dropped
    #[arg(long, env = "PISTONLAB_STABILITY_REL", global = true)]
    pub stability_rel: Option<f64>,
}

impl NumericsConfig {
    pub fn overlay(self, base: NumericsConfig) -> NumericsConfig {
        NumericsConfig {
            t0_fraction: self.t0_fraction.or(base.t0_fraction),
            rungs: self.rungs.or(base.rungs),
            ladder: self.ladder.or(base.ladder),
            tail_rel: self.tail_rel.or(base.tail_rel),
            max_residual: self.max_residual.or(base.max_residual),
            max_condition: self.max_condition.or(base.max_condition),
            stability_rel: self.stability_rel.or(base.stability_rel),
        }
    }

    pub fn pipeline_options(&self) -> Result<PipelineOptions, ConfigError> {
        let defaults = PipelineOptions::default();
        let ladder = match &self.ladder {
            Some(times) => Some(Ladder::from_times(times.clone()).map_err(|e| invalid(e.to_string()))?),
            None => None,
        };
        Ok(PipelineOptions {
            ladder,
            t0_fraction: self.t0_fraction,
            rungs: self.rungs,
            template: None,
            tail_rel: self.tail_rel.unwrap_or(defaults.tail_rel),
            max_condition: self.max_condition.unwrap_or(defaults.max_condition),
            max_residual: self.max_residual.unwrap_or(defaults.max_residual),
            stability_rel: self.stability_rel,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: ScenarioKind,
    pub param: String,
    pub grid: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub spectrum_out: Option<PathBuf>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    pub sweep: Option<SweepConfig>,
}

/// Parses a TOML scenario file. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Toml(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    /// Field-wise `self` over `base`.
    pub fn overlay(self, base: ScenarioConfig) -> ScenarioConfig {
        ScenarioConfig {
            scenario: self.scenario.or(base.scenario),
            format: self.format.or(base.format),
            output: self.output.or(base.output),
            spectrum_out: self.spectrum_out.or(base.spectrum_out),
            geometry: self.geometry.overlay(base.geometry),
            numerics: self.numerics.overlay(base.numerics),
            sweep: self.sweep.or(base.sweep),
        }
    }

    /// Checks positivity of every numeric override and that each geometry
    /// key applies to the chosen scenario.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        let n = &self.numerics;
        let positives = [
            ("a", g.a),
            ("shaft_length", g.shaft_length),
            ("b", g.b),
            ("b1", g.b1),
            ("b2", g.b2),
            ("spectrum_ceiling", g.spectrum_ceiling),
            ("t0_fraction", n.t0_fraction),
            ("tail_rel", n.tail_rel),
            ("max_residual", n.max_residual),
            ("max_condition", n.max_condition),
            ("stability_rel", n.stability_rel),
        ];
        for (name, v) in positives {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if n.rungs == Some(0) {
            return Err(invalid("rungs must be positive"));
        }
        if g.n == Some(0) {
            return Err(invalid("n must be positive"));
        }
        if let Some(lengths) = &g.lengths {
            if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(invalid("lengths must be positive"));
            }
        }
        if let Some(times) = &n.ladder {
            if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(invalid("ladder cutoffs must be positive"));
            }
        }
        let kind = match (&self.sweep, self.scenario) {
            (Some(s), _) => {
                if !s.scenario.sweep_params().contains(&s.param.as_str()) {
                    return Err(invalid(format!(
                        "'{}' is not a sweep parameter of {} (expected one of {:?})",
                        s.param,
                        s.scenario.name(),
                        s.scenario.sweep_params()
                    )));
                }
                Some(s.scenario)
            }
            (None, k) => k,
        };
        if let Some(kind) = kind {
            for key in g.present() {
                if !kind.allowed().contains(&key) {
                    return Err(invalid(format!(
                        "'{key}' does not apply to the {} scenario",
                        kind.name()
                    )));
                }
            }
            if kind == ScenarioKind::Star && (g.n.is_some() || g.a.is_some()) && g.lengths.is_some() {
                return Err(invalid("give either n and a or lengths for a star, not both"));
            }
            if kind == ScenarioKind::Box && g.b.is_some() && (g.b1.is_some() || g.b2.is_some()) {
                return Err(invalid("give either b or b1/b2, not both"));
            }
        }
        Ok(())
    }
}
