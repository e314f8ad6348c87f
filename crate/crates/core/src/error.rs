use std::path::PathBuf;

use crate::solver::Decomposition;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The matrix has no singular value above the rank tolerance.
    #[error("matrix has numerical rank zero")]
    EmptyRank,

    #[error("singular value {value:e} rounds to zero at precision 1e-16")]
    Underflow { value: f64 },

    /// The solver hit its iteration limit. The last iterate is kept so a
    /// caller sweeping a path can skip the candidate.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        last: Box<Decomposition>,
    },

    /// A path solve failed at schedule position `index`.
    #[error("path solve failed at schedule index {index}: {source}")]
    PathStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
