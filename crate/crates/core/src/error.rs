use thiserror::Error;

pub type Result<T> = std::result::Result<T, BctError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BctError {
    #[error("invalid system shape: {0}")]
    InvalidShape(String),

    #[error("pure index does not match shape: {0}")]
    IndexMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: u128, found: u128 },

    #[error("cut {cut} out of range for a {factors}-factor system")]
    CutOutOfRange { cut: usize, factors: usize },

    #[error("association trees have {from} and {to} leaves, index has {index} factors")]
    TreeMismatch { from: usize, to: usize, index: usize },

    #[error("state is not deterministic (total weight {0})")]
    NotDeterministic(String),

    #[error("dilation marginal is inconsistent with the target state: {0}")]
    InconsistentMarginal(String),

    #[error("{entries} entries exceed the memory bound of {bound}")]
    MemoryBound { entries: u128, bound: u128 },

    #[error("oracle refuses size {size} above its bound {bound}")]
    OracleBound { size: u128, bound: u128 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: computation paths disagree ({left} vs {right})")]
    Disagreement {
        what: String,
        left: String,
        right: String,
    },

    #[error("codec construction infeasible: {0}")]
    Infeasible(String),
}
