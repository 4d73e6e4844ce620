use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("critic eta-eta block {value:e} is not above the inversion guard {guard:e}")]
    SingularBlock { value: f64, guard: f64, step: Option<usize> },

    #[error("numerical divergence in {what} at step {step:?}")]
    Divergence { what: &'static str, step: Option<usize> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{0}")]
    Invalid(String),

    #[error("reference time {t} s outside [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },

    #[error("oracle did not converge after {0} iterations")]
    OracleFailure(usize),
}

impl Error {
    /// Attaches a step index to errors that carry one.
    pub fn at_step(self, at: usize) -> Self {
        match self {
            Error::SingularBlock { value, guard, .. } => Error::SingularBlock { value, guard, step: Some(at) },
            Error::Divergence { what, .. } => Error::Divergence { what, step: Some(at) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
