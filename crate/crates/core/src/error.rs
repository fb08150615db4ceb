use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix dimension {n} exceeds the cap of {cap} for {algorithm}")]
    Size {
        algorithm: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "power iteration did not converge after {iterations} iterations \
         (best estimate {estimate}, residual {residual:e})"
    )]
    NonConvergence {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("field error: {0}")]
    Field(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
