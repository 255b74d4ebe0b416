use thiserror::Error;

use crate::lp::LpError;
use crate::solver::PlanningSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A field failed validation. `field` is the offending path, e.g. `upper_probs[0]`.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{what} = {value} lies outside [{lower}, {upper}]")]
    OutOfDomain { what: &'static str, value: f64, lower: f64, upper: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the forecasts admit no probability distribution")]
    AmbiguitySetEmpty,

    #[error("exchange method stopped after {rounds} rounds with constraint violation {residual:e}")]
    ConvergenceFailure { rounds: usize, residual: f64, best: Box<PlanningSolution> },

    #[error("oracle returned {returned} for forecast {index}, above the current bound {current}")]
    ContractViolation { index: usize, current: f64, returned: f64 },

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), reason: reason.into() }
    }
}
