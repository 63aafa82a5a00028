use thiserror::Error;

use crate::vspace::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid usage: {0}")]
    Usage(String),

    /// A matrix row could not be certified absolutely summable against the
    /// input within the term budget.
    #[error("row {row} not certified summable after {terms} terms (tail bound {bound:e})")]
    NonSummableRow {
        row: u64,
        terms: u64,
        bound: f64,
        partial: Box<Vector>,
    },

    /// A series transform at parameter `param` had no tail certificate
    /// within the term budget.
    #[error("series at parameter {param} not certified after {terms} terms (tail bound {bound:e})")]
    NonSummable { param: f64, terms: u64, bound: f64 },

    #[error("finite row of {needed} terms exceeds the budget of {max_terms}")]
    BudgetExceeded { needed: u64, max_terms: u64 },

    #[error("quadrature failed on [{a}, {b}]: {reason} (error estimate {err_estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        err_estimate: f64,
        reason: String,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("source does not match the method: {0}")]
    SourceMismatch(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
