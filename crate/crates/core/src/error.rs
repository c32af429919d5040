use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    #[error("precision loss: estimated rounding error {estimate:e} exceeds {budget:e}")]
    PrecisionLoss { estimate: f64, budget: f64 },

    #[error("enumeration guard: {what} = {value} exceeds limit {limit}")]
    Guard { what: &'static str, value: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("unknown check: {0}")]
    UnknownCheck(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain { func, reason: reason.into() }
}
