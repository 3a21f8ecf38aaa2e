use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("invalid votes: {0}")]
    InvalidVotes(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid scores: {0}")]
    InvalidScores(String),
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty comparison graph")]
    EmptyGraph,
    #[error("disconnected comparison graph")]
    DisconnectedGraph,
    #[error("singular system")]
    SingularSystem,
    #[error("reducible transition matrix")]
    ReducibleChain,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),
    #[error("inconsistent incomplete data: {0}")]
    InconsistentIncompleteData(String),
    #[error("integer resolution too coarse to preserve the target ranking")]
    ResolutionTooCoarse,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
