use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate expansion: det(Q) = 0")]
    DegenerateExpansion,

    #[error("not expansive: eigenvalue of modulus {modulus:.12} is not > 1")]
    NotExpansive { modulus: f64 },

    #[error("invalid digit system: {}", .0.join("; "))]
    InvalidDigitSystem(Vec<String>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain too large: {requested} points exceeds cap of {cap}")]
    DomainTooLarge { requested: u128, cap: usize },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid spin matrix: {0}")]
    InvalidSpinMatrix(String),

    #[error("invalid letter: {0}")]
    InvalidLetter(String),

    #[error("insufficient precision: carry of {vector:?} not resolved within {precision} digits")]
    InsufficientPrecision { vector: Vec<i64>, precision: usize },

    #[error("no group structure: {0}")]
    NoGroupStructure(String),

    #[error("rank-deficient block (rank {rank} < {size}); use the factor-substitution path instead")]
    RankDeficientBlock { rank: usize, size: usize },

    #[error("non-primitive substitution: {0}")]
    NonPrimitive(String),

    #[error("unsupported dimension m = {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
