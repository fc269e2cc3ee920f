use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex set must be nonempty")]
    EmptySet,
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(usize),
    #[error("order {r} out of range (allowed {min}..={max})")]
    OrderOutOfRange { r: usize, min: usize, max: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{what} needs {needed} steps, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("constant `{name}` undefined: {reason}")]
    Domain { name: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
