use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (negative time,
    /// non-positive rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("model validation failed: {0}")]
    Validation(ValidationReport),

    /// The exhaustive enumeration oracle refuses trees with too many leaves.
    #[error("too many independent leaves for enumeration: {leaves} > {max}")]
    Capacity { leaves: usize, max: usize },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("malformed model file: {0}")]
    Schema(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
