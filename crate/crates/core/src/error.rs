use thiserror::Error;

/// Errors raised by the compression design and rate evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DwzError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no sign change of the search function on [{lo}, {hi}]")]
    BracketError { lo: f64, hi: f64 },

    #[error("invalid conditioning subset: BS {n} cannot condition on itself")]
    InvalidSubset { n: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid backhaul budget {0} (must be finite and non-negative)")]
    InvalidBudget(f64),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, DwzError>;
