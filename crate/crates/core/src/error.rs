use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Row-by-column shape of a matrix or vector (`cols == 1` for vectors).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: Shape,
        actual: Shape,
    },

    #[error("{context}: entry is not a finite number")]
    NonFinite { context: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("simplex solver stalled after {iterations} pivots")]
    SolverStalled { iterations: usize },

    #[error("simplex result failed post-solve feasibility check (residual {residual:e})")]
    NumericalFailure { residual: f64 },

    #[error("Fourier-Motzkin elimination exceeded {limit} rows ({rows} produced)")]
    EliminationBlowup { rows: usize, limit: usize },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: Shape, actual: Shape) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }
}
