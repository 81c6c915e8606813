//! Command-line front end for `pistonlab`: named scenarios, parameter
//! sweeps and the published-results suite, emitted as tables, CSV or JSON.

pub mod app;
pub mod config;
pub mod grid;
pub mod report;
pub mod scenarios;
pub mod suite;

pub use app::{run, Cli, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
