use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("row {row}: {message}")]
    MalformedRow { row: u64, message: String },

    #[error("insufficient tail: {n_tail} samples at or above xmin, need at least {required}")]
    InsufficientTail { n_tail: usize, required: usize },

    #[error("degenerate tail: every tail sample equals xmin")]
    DegenerateTail,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("degenerate assortativity: {0}")]
    DegenerateAssortativity(&'static str),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("degenerate regressor: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid {kind} file: {message}")]
    Format { kind: &'static str, message: String },

    #[error("rank-deficient design matrix, collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("infeasible synthetic market config: {0}")]
    Infeasible(String),
}
