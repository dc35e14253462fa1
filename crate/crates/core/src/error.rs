use thiserror::Error;

/// Errors produced by the boosting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A non-finite value or a value outside a function's domain.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty dataset")]
    EmptyDataset,

    /// The optimizer produced a non-finite value or failed to converge.
    #[error("numeric failure{}: {message}", iteration.map(|k| format!(" at iteration {k}")).unwrap_or_default())]
    NumericFailure {
        iteration: Option<usize>,
        message: String,
    },

    /// The one-dimensional objective decreases without bound.
    #[error("line search objective is unbounded below")]
    Unbounded,

    /// The search direction vanishes on every sample.
    #[error("degenerate direction: basis function is zero on every sample")]
    DegenerateDirection,
}

impl Error {
    pub(crate) fn numeric(message: impl Into<String>) -> Self {
        Error::NumericFailure {
            iteration: None,
            message: message.into(),
        }
    }

    /// Attach an iteration index to a numeric failure.
    pub(crate) fn at_iteration(self, k: usize) -> Self {
        match self {
            Error::NumericFailure { message, .. } => Error::NumericFailure {
                iteration: Some(k),
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
