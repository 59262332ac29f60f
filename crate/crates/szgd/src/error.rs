//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gradient of `{objective}` is undefined at the requested point")]
    GradientUndefined { objective: String },

    #[error("objective `{objective}` does not support this operation: {reason}")]
    Unsupported { objective: String, reason: String },

    /// A probe of the objective returned a non-finite value. A single NaN
    /// probe invalidates the whole estimate, so this is never skipped.
    #[error("non-finite objective value {value} at probe point {point:?}")]
    NonFiniteProbe { point: Vec<f64>, value: f64 },

    #[error("nonpositive series value {value} at index {index}; log-domain fits need positive data")]
    NonPositiveSeries { index: usize, value: f64 },

    #[error("prox inner solve failed: {0}")]
    ProxSolver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
