use thiserror::Error;

/// Errors raised by the model, solvers and constant evaluations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state has dimension {state} but parameters have d = {params}")]
    DimensionMismatch { state: usize, params: usize },

    #[error("truncated state space of {states} states exceeds the budget of {budget}")]
    MemoryBudget { states: usize, budget: usize },

    #[error("{what} did not converge: last two values {previous:e} and {last:e}")]
    NonConvergence { what: String, previous: f64, last: f64 },

    #[error("bracketing gap {gap:e} exceeds the requested tolerance {tolerance:e}")]
    ToleranceUnreachable { gap: f64, tolerance: f64 },

    #[error("long-time value not stabilized: |v(t) - v(t/2)| = {difference:e} > {tolerance:e}")]
    NotStabilized { difference: f64, tolerance: f64 },

    #[error("{reading} normalization gives escape probability {value}, outside [0, 1]")]
    NormalizationFailure { reading: String, value: f64 },

    #[error("denominator {value:e} below 1e-14")]
    DegenerateDenominator { value: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
