use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("inadmissible state in cell {cell}: {reason}")]
    InvariantDomain { cell: usize, reason: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("hyperbolicity error: {0}")]
    Hyperbolicity(String),
    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    /// Failures caused by step sizes, inversions or singular matrices.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_) | Error::Structure(_) | Error::Hyperbolicity(_) | Error::Data(_)
        )
    }

    /// Failures caused by a computed state leaving its admissible set.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::InvariantDomain { .. } | Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
