//! Argument parsing, config merging and dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use pistonlab::piston::sign_table;
use pistonlab::Error;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{
    parse_config, GeometryConfig, NumericsConfig, OutputFormat, ScenarioConfig, ScenarioKind, SweepConfig,
};
use crate::grid::parse_grid;
use crate::report::{to_value, Report};
use crate::scenarios::{execute, headline, with_param};
use crate::suite::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pistonlab", version, about = "Casimir vacuum energies and piston forces")]
pub struct Cli {
    /// TOML scenario file; flags and PISTONLAB_* variables override it
    #[arg(long, short, env = "PISTONLAB_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, env = "PISTONLAB_FORMAT", global = true)]
    pub format: Option<OutputFormat>,
    /// Write the report here instead of stdout
    #[arg(long, short, env = "PISTONLAB_OUTPUT", global = true)]
    pub output: Option<PathBuf>,
    /// Write the computed spectrum in the columnar text format
    #[arg(long, env = "PISTONLAB_SPECTRUM_OUT", global = true)]
    pub spectrum_out: Option<PathBuf>,
    #[command(flatten)]
    pub numerics: NumericsConfig,
    /// Without a subcommand the scenario comes from --config
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interval with Dirichlet/Neumann ends
    Interval(GeometryConfig),
    /// Star graph with Kirchhoff centre
    Star(GeometryConfig),
    /// Electromagnetic rectangular box
    Box(GeometryConfig),
    /// Permeable piston in a long square shaft
    Piston3d(GeometryConfig),
    /// One report row per grid value of a geometry parameter
    Sweep(SweepArgs),
    /// Reproduce every published example and print a pass/fail table
    PaperSuite,
    /// Expected force signs as a conformance fixture
    SignTable,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario to sweep
    #[arg(long = "scenario", value_enum, env = "PISTONLAB_SWEEP_SCENARIO")]
    pub target: Option<ScenarioKind>,
    /// Geometry parameter to vary
    #[arg(long, env = "PISTONLAB_SWEEP_PARAM")]
    pub param: Option<String>,
    /// Values: "1,2,4", "1..6", "0.01..50:12:log"
    #[arg(long, env = "PISTONLAB_SWEEP_GRID", allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub geometry: GeometryConfig,
}

enum Task {
    Scenario(ScenarioKind),
    Sweep(SweepConfig),
    PaperSuite,
    SignTable,
}

struct Usage(String);

impl From<crate::config::ConfigError> for Usage {
    fn from(e: crate::config::ConfigError) -> Self {
        Usage(e.to_string())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, &matches) {
        Ok(code) => code,
        Err(Usage(message)) => {
            eprintln!("error: {message}");
            EXIT_USAGE
        }
    }
}

/// Drops geometry values that came from the environment but do not apply
/// to the chosen scenario, so one shell can carry settings for several.
fn drop_foreign_env(geometry: &mut GeometryConfig, matches: Option<&ArgMatches>, kind: ScenarioKind) {
    let Some(m) = matches else { return };
    for key in geometry.present() {
        if m.value_source(key) == Some(ValueSource::EnvVariable) && !kind.allowed().contains(&key) {
            geometry.clear(key);
        }
    }
}

fn dispatch(cli: Cli, matches: &ArgMatches) -> Result<i32, Usage> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    let sub = matches.subcommand().map(|(_, m)| m);
    let mut top = ScenarioConfig {
        format: cli.format,
        output: cli.output,
        spectrum_out: cli.spectrum_out,
        numerics: cli.numerics,
        ..ScenarioConfig::default()
    };
    let task = match cli.command {
        Some(Command::PaperSuite) => Task::PaperSuite,
        Some(Command::SignTable) => Task::SignTable,
        Some(Command::Sweep(args)) => {
            let base = file.sweep.clone();
            let target = args.target.or(base.as_ref().map(|s| s.scenario));
            let param = args.param.or(base.as_ref().map(|s| s.param.clone()));
            let grid = args.grid.or(base.as_ref().map(|s| s.grid.clone()));
            let (Some(scenario), Some(param), Some(grid)) = (target, param, grid) else {
                return Err(Usage("sweep needs --scenario, --param and --grid".into()));
            };
            let mut geometry = args.geometry;
            drop_foreign_env(&mut geometry, sub, scenario);
            top.geometry = geometry;
            let sweep = SweepConfig { scenario, param, grid };
            top.sweep = Some(sweep.clone());
            Task::Sweep(sweep)
        }
        Some(cmd) => {
            let (kind, mut geometry) = match cmd {
                Command::Interval(g) => (ScenarioKind::Interval, g),
                Command::Star(g) => (ScenarioKind::Star, g),
                Command::Box(g) => (ScenarioKind::Box, g),
                Command::Piston3d(g) => (ScenarioKind::Piston3d, g),
                _ => unreachable!("handled above"),
            };
            drop_foreign_env(&mut geometry, sub, kind);
            top.geometry = geometry;
            top.scenario = Some(kind);
            Task::Scenario(kind)
        }
        None => match (&file.sweep, file.scenario) {
            (Some(sweep), _) => Task::Sweep(sweep.clone()),
            (None, Some(ScenarioKind::PaperSuite)) => Task::PaperSuite,
            (None, Some(kind)) => Task::Scenario(kind),
            (None, None) => {
                return Err(Usage(
                    "no scenario: give a subcommand or a config with `scenario`".into(),
                ))
            }
        },
    };
    let file = match &task {
        Task::Scenario(kind) if file.scenario.is_some_and(|k| k != *kind) || file.sweep.is_some() => ScenarioConfig {
            scenario: None,
            sweep: None,
            geometry: GeometryConfig::default(),
            ..file
        },
        _ => file,
    };
    let config = top.overlay(file);
    config.validate()?;
    let format = config.format.unwrap_or_default();
    let options = config.numerics.pipeline_options()?;

    let (report, code, spectrum) = match task {
        Task::PaperSuite => paper_suite(),
        Task::SignTable => (sign_table_report(), EXIT_OK, None),
        Task::Sweep(sweep) => sweep_report(&sweep, &config.geometry, &options, &config.numerics)?,
        Task::Scenario(kind) => {
            if config.spectrum_out.is_some()
                && !matches!(kind, ScenarioKind::Interval | ScenarioKind::Star | ScenarioKind::Box)
            {
                return Err(Usage(format!("{} has no spectrum to write", kind.name())));
            }
            match execute(kind, &config.geometry, &options, config.spectrum_out.is_some()) {
                Ok(out) => {
                    let mut diagnostics = out.diagnostics;
                    diagnostics.insert("status".into(), json!("ok"));
                    let report = Report::new(kind.name(), out.inputs, out.results, Value::Object(diagnostics));
                    (report, EXIT_OK, out.spectrum)
                }
                Err(Error::InvalidInput(message)) => return Err(Usage(message)),
                Err(e) => {
                    let report = Report::new(
                        kind.name(),
                        json!({ "geometry": to_value(&config.geometry), "numerics": to_value(&options) }),
                        Value::Null,
                        json!({ "status": "failed", "error": e.to_string(), "detail": to_value(&e_detail(&e)) }),
                    );
                    (report, EXIT_FAILURE, None)
                }
            }
        }
    };
    let mut code = code;
    if let Err(message) = emit(&report.render(format), config.output.as_deref()) {
        eprintln!("error: {message}");
        code = EXIT_FAILURE;
    }
    if let (Some(path), Some(spectrum)) = (&config.spectrum_out, spectrum) {
        if let Err(e) = fs::write(path, spectrum.to_text()) {
            eprintln!("error: {}: {e}", path.display());
            code = EXIT_FAILURE;
        }
    }
    Ok(code)
}

fn e_detail(e: &Error) -> Value {
    match e {
        Error::UnreliableFit {
            condition, residual, ..
        } => json!({ "condition": condition, "residual": residual }),
        Error::Instability {
            finite_part,
            dropped,
            gap,
            tolerance,
        } => {
            json!({ "finite_part": finite_part, "dropped": dropped, "gap": gap, "tolerance": tolerance })
        }
        Error::InsufficientSpectrum {
            t,
            omega_max,
            required_omega_max,
        } => {
            json!({ "t": t, "omega_max": omega_max, "required_omega_max": required_omega_max })
        }
        _ => Value::Null,
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn paper_suite() -> (Report, i32, Option<pistonlab::spectra::Spectrum>) {
    let checks = run_suite();
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = Report::new(
        "paper-suite",
        json!({}),
        json!({ "checks": to_value(&checks), "passed": checks.len() - failed, "failed": failed }),
        json!({ "status": if failed == 0 { "ok" } else { "failed" } }),
    );
    (report, if failed == 0 { EXIT_OK } else { EXIT_FAILURE }, None)
}

fn sign_table_report() -> Report {
    Report::new(
        "sign-table",
        json!({}),
        json!({ "rows": to_value(&sign_table()) }),
        json!({ "columns": ["scenario", "parameters", "expected"] }),
    )
}

type Emitted = (Report, i32, Option<pistonlab::spectra::Spectrum>);

fn sweep_report(
    sweep: &SweepConfig,
    base: &GeometryConfig,
    options: &pistonlab::regular::PipelineOptions,
    numerics: &NumericsConfig,
) -> Result<Emitted, Usage> {
    let values = parse_grid(&sweep.grid).map_err(|e| Usage(format!("grid: {e}")))?;
    let kind = sweep.scenario;
    let param = sweep.param.as_str();
    let rows: Vec<Value> = values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let outcome = with_param(base, kind, param, value).and_then(|geometry| {
                ScenarioConfig {
                    scenario: Some(kind),
                    geometry: geometry.clone(),
                    ..ScenarioConfig::default()
                }
                .validate()
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
                execute(kind, &geometry, options, false)
            });
            let mut row = Map::new();
            row.insert("index".into(), json!(index));
            row.insert(param.into(), json!(value));
            match outcome {
                Ok(out) => {
                    row.insert("status".into(), json!("ok"));
                    row.insert("error".into(), Value::Null);
                    row.insert("results".into(), out.results);
                    row.insert("diagnostics".into(), Value::Object(out.diagnostics));
                }
                Err(e) => {
                    row.insert("status".into(), json!("failed"));
                    row.insert("error".into(), json!(e.to_string()));
                }
            }
            Value::Object(row)
        })
        .collect();
    let failed = rows.iter().filter(|r| r["status"] == "failed").count();
    let mut columns = vec!["index".to_string(), param.to_string(), "status".to_string()];
    columns.extend(headline(kind).iter().map(|s| s.to_string()));
    columns.push("error".into());
    let report = Report::new(
        "sweep",
        json!({
            "scenario": kind.name(),
            "param": param,
            "grid": sweep.grid,
            "values": values,
            "geometry": to_value(base),
            "numerics": to_value(numerics),
        }),
        json!({ "rows": rows }),
        json!({ "failed": failed, "columns": columns }),
    );
    Ok((report, if failed == 0 { EXIT_OK } else { EXIT_FAILURE }, None))
}
