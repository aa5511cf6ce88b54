use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "infeasible one-photon rate on mode {mode}: gamma - sum_k |J[{mode}][k]| = {residual:.6e} < 0; \
         rescaling J by at most {max_rescale:.6} makes every rate non-negative"
    )]
    InfeasibleRates {
        mode: usize,
        residual: f64,
        max_rescale: f64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph validation failed: {0}")]
    Validation(String),

    #[error("exhaustive enumeration refused for n = {n}: limit is n <= {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error(
        "integration blew up at t = {t:.6} ({reason}); try a smaller dt (current dt = {dt:e})"
    )]
    Blowup { t: f64, dt: f64, reason: String },

    #[error("trajectory aborted after {samples} samples: {source}")]
    Aborted {
        samples: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data for a temperature fit: {usable} usable levels, need at least 3")]
    InsufficientData { usable: usize },

    #[error("no thermal fit: log-probability slope {slope:.6e} is not negative")]
    NoThermalFit { slope: f64 },

    #[error("spectrum was enumerated from a different graph ({expected} vs {found})")]
    GraphMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
