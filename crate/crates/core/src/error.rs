use thiserror::Error;

use crate::label::Label;

/// Errors raised by the toolkit.
///
/// The CLI maps `Format`/`Invalid*` variants to its validation exit code and
/// `NumericGuard` to the numeric-guard exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(Label),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("{0}")]
    Refused(String),
    #[error("numeric guard tripped: {0}")]
    NumericGuard(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
