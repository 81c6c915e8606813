//! Casimir piston forces on intervals, star graphs and rectangular boxes.
//!
//! The crate is split into three layers:
//!
//! * [`spectra`] builds normal-mode spectra for each geometry.
//! * [`regular`] turns a spectrum into exponentially cut-off sums and extracts
//!   the cutoff-independent part of the energy.
//! * [`piston`] computes forces, pressures and sign classifications.

pub mod error;
pub mod piston;
pub mod regular;
pub mod spectra;
pub mod sum;

pub use error::{Error, Result};
