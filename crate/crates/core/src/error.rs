use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unregistered indeterminate `{0}`")]
    Unregistered(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("zero input: {0}")]
    ZeroInput(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix")]
    Singular,
    #[error("rank-deficient input: {0}")]
    RankDeficient(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not in domain: {0}")]
    NotInDomain(String),
    #[error("needs refinement of basis element {index} by {q}")]
    NeedsRefinement { index: usize, q: u32 },
    #[error("refinement refused for basis element {index}: {reason}")]
    RefinementRefused { index: usize, reason: String },
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
