use thiserror::Error;

/// Errors produced by estimators, controllers, environments and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, config field or precondition is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An input has the wrong shape or length for the receiving component.
    #[error("input mismatch: {0}")]
    InputMismatch(String),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Persisted records cannot be aggregated together.
    #[error("inconsistent records: {0}")]
    InconsistentRecords(String),

    /// A persisted file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
