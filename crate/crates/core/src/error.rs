use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("malformed edge list at line {line}: {reason}")]
    EdgeList { line: usize, reason: String },

    #[error("dimension mismatch: objective `{objective}` expects {expected}, got {actual}")]
    DimensionMismatch {
        objective: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("iteration budget of {0} exhausted")]
    BudgetExhausted(usize),

    #[error("aggregation error: {0}")]
    Aggregate(String),

    #[error("denominator magnitude {magnitude:e} below floor at (w1, w2) = ({w1}, {w2})")]
    UnstablePoint { w1: f64, w2: f64, magnitude: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
