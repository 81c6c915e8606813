use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finder did not converge in bracket [{lo}, {hi}] after {iterations} iterations")]
    NumericalFailure { lo: f64, hi: f64, iterations: usize },

    #[error("mode enumeration would produce ~{estimated} modes, budget is {budget}")]
    ResourceLimit { estimated: u64, budget: u64 },

    #[error(
        "spectrum truncated at omega_max={omega_max} is insufficient at t={t}; \
         need omega_max >= {required_omega_max}"
    )]
    InsufficientSpectrum {
        t: f64,
        omega_max: f64,
        required_omega_max: f64,
    },

    #[error("unreliable fit: {reason} (condition={condition:.3e}, residual={residual:.3e})")]
    UnreliableFit {
        reason: String,
        condition: f64,
        residual: f64,
    },

    #[error("finite part unstable under window change: {finite_part} vs {dropped} (gap {gap:.3e} > {tolerance:.3e})")]
    Instability {
        finite_part: f64,
        dropped: f64,
        gap: f64,
        tolerance: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
