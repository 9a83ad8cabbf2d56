use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by every stage of the pruning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("target column `{0}` not found")]
    MissingTarget(String),

    #[error("non-numeric cell `{value}` in column `{column}` (line {line})")]
    NonNumeric {
        column: String,
        value: String,
        line: u64,
    },

    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero variance in response")]
    ZeroVariance,

    #[error("numerically singular system (pivot {0:e})")]
    Singular(f64),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("instance too large for exhaustive oracle: {0}")]
    OracleGuard(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
