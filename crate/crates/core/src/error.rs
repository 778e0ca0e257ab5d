use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("state budget exceeded: {required} states required, budget is {budget}")]
    StateBudgetExceeded { required: String, budget: u64 },

    #[error("size budget exceeded: {required} > {budget}")]
    SizeBudgetExceeded { required: usize, budget: usize },

    #[error("limit exceeded: {value} > {limit}")]
    LimitExceeded { value: usize, limit: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
