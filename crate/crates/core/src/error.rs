use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("query budget of {budget} distinct pairs exhausted")]
    BudgetExhausted { budget: usize },

    #[error("matrix is not constant on the block partition: entry ({row}, {col}) differs from its block representative")]
    NotBlockConstant { row: usize, col: usize },

    #[error("observed kernel entries are not an equivalence pattern: {0}")]
    NotEquivalence(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("sign search exhausted {evaluations} evaluations; best objective {best} < target {target}")]
    SearchExhausted {
        evaluations: usize,
        best: f64,
        target: f64,
    },

    #[error("dense path limited to m <= {limit}, got m = {m}")]
    TooLargeForDense { m: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
