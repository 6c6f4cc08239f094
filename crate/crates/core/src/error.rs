use std::path::PathBuf;

use crate::lp::LpStatus;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// The design matrix is numerically rank deficient; `col` is the first
    /// QR diagonal that fell below the rank tolerance.
    #[error("rank-deficient design matrix at column {col}")]
    RankDeficient { col: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An LP terminated with a non-optimal status where an optimum was required.
    #[error("LP solver returned {status:?} in {context}")]
    Solver { status: LpStatus, context: String },

    #[error("dataset carries no truth payload; this operation requires one")]
    MissingTruth,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("unsupported design family: {0}")]
    UnsupportedFamily(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no records to emit")]
    EmptyRecords,
}

pub type Result<T> = std::result::Result<T, Error>;
