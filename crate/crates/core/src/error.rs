use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("negative entry {value} at row {row}, col {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, exceeding 1 + {tol:e}")]
    RowSumExceeded { row: usize, sum: f64, tol: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("states {0:?} do not form a strongly connected class")]
    NotStronglyConnected(Vec<usize>),

    #[error("cyclic structure of class {class:?} is inconsistent with period {period}")]
    InconsistentPeriod { class: Vec<usize>, period: usize },

    #[error("stationary solver did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("block of {size} tuples exceeds block_cutoff {cutoff}")]
    BlockTooLarge { size: usize, cutoff: usize },

    #[error("invariant `{name}` violated: residual {residual:e} exceeds {tol:e}")]
    Invariant { name: String, residual: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape { expected: expected.to_string(), got: got.to_string() }
    }

    /// True for errors caused by a failed numerical check rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Invariant { .. } | Error::NoConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
