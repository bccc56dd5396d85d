use thiserror::Error;

use crate::marker::ViolationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("graph not usable as an edge shift: {0}")]
    NotSftValid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("cycle is not primitive: {0}")]
    NotPrimitive(String),
    #[error("marker data does not compose: {0}")]
    Composability(String),
    #[error("marker data words coincide")]
    IdenticalData,
    #[error("marker kind mismatch: {0}")]
    KindMismatch(String),
    #[error("overlap condition violated: {0}")]
    Overlap(Box<ViolationReport>),
    #[error("requested {requested} letters but only {available} are determined")]
    PrefixTooLong { requested: usize, available: usize },
    #[error("points are not tail equivalent")]
    NotTailEquivalent,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("bound exhausted: {0}")]
    BoundExhausted(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
