//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matrix/vector dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The privacy budget would be exceeded by the requested spend.
    #[error("privacy budget exhausted: requested {requested} with {remaining} remaining")]
    BudgetExhausted { requested: f64, remaining: f64 },

    /// The interior-point solver could not reach the requested tolerance.
    #[error("sdp solver failed ({status}): {detail}")]
    SolverFailure { status: &'static str, detail: String },

    /// Problem size exceeds the dense-solver guard for the degree-4 path.
    #[error("instance too large for the dense degree-4 path: {0}")]
    DeskLimit(String),

    /// A score oracle returned a non-finite value; the walk is aborted
    /// rather than silently resampled.
    #[error("non-finite score at {context}")]
    NonFiniteScore { context: String },

    /// Bin-index arithmetic would overflow the integer width.
    #[error("bin index overflow: {0}")]
    BinIndexOverflow(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
