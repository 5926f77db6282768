use thiserror::Error;

use crate::shift::Word;

/// Errors produced by the library. CLI exit codes are derived from
/// [`ShiftError::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShiftError {
    #[error("graph has no edges left after pruning")]
    EmptyGraph,
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for alphabet of size {size}")]
    VertexOutOfRange { index: usize, size: usize },
    #[error("duplicate symbol name {0:?}")]
    DuplicateName(String),
    #[error("graph is not irreducible; strongly connected components: {components:?}")]
    NotIrreducible { components: Vec<Vec<usize>> },
    #[error("word {0:?} is not admissible")]
    NotAWord(Word),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("potential table error: {0}")]
    Potential(String),
    #[error("variation certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("exhaustion levels are not nested at level {0}")]
    NotNested(usize),
    #[error("power iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("too few positive partition-function entries ({found}, need {needed})")]
    TooFewEntries { found: usize, needed: usize },
    #[error("enumeration budget of {0} points exceeded")]
    BudgetExceeded(u64),
    #[error("measure error: {0}")]
    Measure(String),
    #[error("code error: {0}")]
    Code(String),
    #[error("point is outside the magic-word domain: {0}")]
    OutsideDomain(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("io error: {0}")]
    Io(String),
}

impl ShiftError {
    /// 1 for verification failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ShiftError::VerificationFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, ShiftError>;
