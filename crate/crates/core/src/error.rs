use std::path::PathBuf;

use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrator stage produced a non-finite value.
    #[error("integration error at step {step}: {detail}")]
    Integration { step: usize, detail: String },

    /// A simulated trajectory exceeded the overflow guard.
    #[error("simulation diverged at step {step}: |{var}| exceeded {guard:e}")]
    Divergence { step: usize, var: String, guard: f64 },

    /// Dimension or length constraints violated.
    #[error("size error: {0}")]
    Size(String),

    /// Malformed or non-finite input.
    #[error("input error: {0}")]
    Input(String),

    /// An iterative method failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A correlation was requested on zero-variance residuals.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// Duplicate identifiers or mutually exclusive options.
    #[error("conflict: {0}")]
    Conflict(String),

    /// Bad command-line usage or configuration (exit code 1 in the CLI).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
