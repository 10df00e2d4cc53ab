use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("outside the validity domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Every eigenvalue of the interference covariance is above the cutoff.
    #[error("no interference-free subspace: all {dim} eigenvalues exceed the threshold")]
    EmptyFilter { dim: usize },

    #[error("quadrature did not converge: value {value:e}, estimated relative error {achieved:e}")]
    Quadrature { value: f64, achieved: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl Error {
    /// Configuration problems are reported separately from runtime failures
    /// by the CLI (exit code 1 vs 2).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
