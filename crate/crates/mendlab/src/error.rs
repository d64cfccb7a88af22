use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("instance too large: {requested} vertices exceeds the cap of {cap}")]
    InstanceTooLarge { requested: u128, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("search budget exceeded (lower bound {lower_bound})")]
    BudgetExceeded { lower_bound: usize },

    #[error("policy violation: {0}")]
    PolicyViolation(String),

    #[error("no mend exists: {0}")]
    Infeasible(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model inapplicable: {0}")]
    ModelInapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
