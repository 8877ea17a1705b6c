use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate {value} at index {index}")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "normalized regularization parameter {normalized} is below the required {required}; \
         raise lambda to at least {suggested_lambda}"
    )]
    ParameterTooSmall {
        normalized: f64,
        required: f64,
        suggested_lambda: f64,
    },

    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFiniteObjective { point: Vec<f64>, value: f64 },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("grid mode supports dimension at most {max}, got {dim}")]
    GridDimensionTooLarge { dim: usize, max: usize },

    #[error("tree block [{start}, {end}) does not fit in ambient dimension {ambient}")]
    BlockOverflow {
        start: usize,
        end: usize,
        ambient: usize,
    },

    #[error("empirical constant {value} rejected without explicit override")]
    EmpiricalConstant { value: f64 },

    #[error("evaluator failure at node {node}: value {value}")]
    EvaluatorFailure { node: String, value: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
