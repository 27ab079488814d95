use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("message has zero probability under the prior")]
    DegenerateMessage,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("distribution is not verifiably Bayes plausible")]
    NotVbp,

    #[error("distribution is not fully verified")]
    NotFullyVerified,

    #[error("ambiguous device is not simple")]
    NonSimpleDevice,

    #[error("message {0} is outside the common support")]
    MessageOutsideSupport(usize),

    #[error("unreachable vertex {vertex:?} of target set {target:?}: posterior {posterior:?} has no mass on state {state}")]
    UnreachableVertex {
        posterior: Vec<f64>,
        vertex: Vec<f64>,
        target: Vec<Vec<f64>>,
        state: usize,
    },

    #[error("posterior {posterior:?} lies on the relative boundary of target set {target:?}")]
    BoundaryPosterior {
        posterior: Vec<f64>,
        target: Vec<Vec<f64>>,
    },

    #[error("enumeration budget exceeded: {required} evaluations > {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors the CLI reports as infeasibility (exit code 3).
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_)
                | Error::NotVbp
                | Error::NotFullyVerified
                | Error::UnreachableVertex { .. }
                | Error::BoundaryPosterior { .. }
        )
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
