use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is outside the domain: coordinate {index} = {value} not in [{lower}, {upper}]")]
    OutOfDomain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("objective returned a non-finite value {value} at {point:?}")]
    NonFiniteValue { value: f64, point: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("budget of {budget} evaluations is below the minimum of {required}")]
    BudgetTooSmall { budget: u64, required: u64 },
    #[error("function `{name}` does not support dimension {dim}")]
    UnsupportedDimension { name: String, dim: usize },
    #[error("unknown benchmark function `{0}`")]
    UnknownFunction(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
