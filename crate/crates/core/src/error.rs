use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// S(x, α) = a aᵀ failed to factor as symmetric positive definite.
    #[error("diffusion matrix S(x, alpha) is singular or not positive definite (increment {step:?})")]
    SingularDiffusion { step: Option<usize> },

    /// A filter left too few increments for an estimator to be defined.
    #[error("degenerate filter: {0}")]
    DegenerateFilter(String),

    #[error("simulated state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("constraint on component {index} fixes value {value}, outside [{lower}, {upper}]")]
    ConstraintOutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the data (as opposed to bad input or I/O).
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::SingularDiffusion { .. } | Error::DegenerateFilter(_) | Error::NonFiniteState { .. }
        )
    }
}
