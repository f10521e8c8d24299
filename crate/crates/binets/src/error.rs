//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector does not represent a projective point")]
    ZeroVector,

    #[error("matrix is singular or nearly singular (residual {residual:.3e})")]
    Singular { residual: f64 },

    #[error("degenerate {what} (residual {residual:.3e})")]
    Degenerate { what: String, residual: f64 },

    #[error("{check} check failed at {worst}: residual {residual:.3e} > tol {tol:.3e}")]
    CheckFailed {
        check: &'static str,
        worst: String,
        residual: f64,
        tol: f64,
    },

    #[error("missing value at cell {0}")]
    MissingCell(String),

    #[error("regularity violated at {what}: {detail}")]
    Regularity { what: String, detail: String },

    #[error("point at infinity: projection undefined ({detail})")]
    AtInfinity { detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn degenerate(what: impl Into<String>, residual: f64) -> Self {
        Error::Degenerate {
            what: what.into(),
            residual,
        }
    }

    pub(crate) fn regularity(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Regularity {
            what: what.into(),
            detail: detail.into(),
        }
    }
}
