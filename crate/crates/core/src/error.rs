use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("trivial neutral case: effective branching rate must be strictly positive")]
    TrivialNeutral,

    #[error("non-increasing violated: dominance rate at order {order} ({next}) exceeds order {prev_order} ({prev})")]
    NonIncreasing {
        prev_order: u32,
        prev: f64,
        order: u32,
        next: f64,
    },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state-space cap exceeded: N = {n} > cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("chain has {0} closed communicating classes; specify which one")]
    AmbiguousClosedClass(usize),

    #[error("state {0} is not absorbing")]
    NotAbsorbing(String),

    #[error("negative probability {value:e} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("value {value} outside [0, 1] beyond clamp tolerance at index {index}")]
    OutOfUnitInterval { index: usize, value: f64 },

    #[error("non-integrable parameters: {0}")]
    NonIntegrable(String),

    #[error("truncation did not converge: {0}")]
    Truncation(String),

    #[error("event log: {0}")]
    EventLog(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
