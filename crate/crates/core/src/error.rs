use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: negative timestamp {value}")]
    NegativeTimestamp { line: u64, value: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("no dynamics to fit: observed values are constant")]
    NoDynamics,

    #[error("fit did not converge after {starts} starts (best residual sum of squares {best_ssr:e})")]
    FitNotConverged { starts: usize, best_ssr: f64 },

    #[error("cannot infer parameters: {0}")]
    Inference(String),

    #[error("power-law regime requires s<1 (got s = {0})")]
    NotPowerLaw(f64),

    #[error("integration failed at t = {t}: {message}")]
    Integration { t: f64, message: String },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MalformedRow { .. }
                | Error::NegativeTimestamp { .. }
                | Error::EmptyInput(_)
                | Error::InvalidTrace(_)
                | Error::InvalidArgument(_)
                | Error::Json(_)
        )
    }
}
