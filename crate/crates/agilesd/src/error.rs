//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, simulation and the CLI harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A value passed to an operation is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A config-file key is not part of the schema.
    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    /// A config-file key required by the invoked operation is absent.
    #[error("missing required config key `{0}`")]
    MissingKey(String),

    /// A config-file value failed to parse or is out of range.
    #[error("config key `{key}`: {reason}")]
    ConfigValue { key: String, reason: String },

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The simulator reached a state its invariants forbid.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A computed result violates an internal consistency bound.
    #[error("internal consistency: {0}")]
    Inconsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
