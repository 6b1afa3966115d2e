use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground sets differ")]
    GroundMismatch,
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("pole at N = {at}: factor {factor}{}", context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Pole {
        at: BigInt,
        factor: String,
        context: Option<String>,
    },
    #[error("missing value: {0}")]
    MissingValue(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
