use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe size mismatch: {left} vs {right}")]
    UniverseMismatch { left: usize, right: usize },

    #[error("index {index} out of range for universe of size {n}")]
    IndexOutOfRange { index: u64, n: usize },

    #[error("indices must be strictly increasing (saw {prev} then {next})")]
    UnsortedIndices { prev: u32, next: u32 },

    #[error("sketch capacity must be at least 1")]
    ZeroCapacity,

    #[error("sketch weight must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error("cannot merge sketches of capacity {0} and {1}")]
    CapacityMismatch(usize, usize),

    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: edge list is not grouped by left vertex ({id} reappears)")]
    UngroupedEdgeList {
        path: PathBuf,
        line: usize,
        id: usize,
    },

    #[error("right universe size unknown: add a `%sofa n=<n>` header or pass it explicitly")]
    MissingUniverse,

    #[error("stream pass budget exhausted: only two passes are allowed")]
    PassBudgetExhausted,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("memory budget exceeded: need {needed} entries, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("streaming clusterer did not settle within {0} phases")]
    PhaseCeiling(usize),

    #[error("reconstruction metrics undefined for a graph with no edges")]
    NoEdges,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
