use thiserror::Error;

use crate::liouville::VecOrdering;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch ({detail})")]
    Shape { op: &'static str, detail: String },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ordering mismatch: expected {expected:?}, found {found:?}")]
    OrderingMismatch {
        expected: VecOrdering,
        found: VecOrdering,
    },

    #[error("operation requires bipartite space metadata")]
    MissingBipartite,

    #[error("state is not trace-normalized (trace = {trace})")]
    NotNormalized { trace: f64 },

    #[error("generator is not trace preserving (trace row residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("generator has an empty kernel")]
    EmptyKernel,

    #[error("1 - L1 is singular (condition number {condition:.3e}); the approximation is invalid")]
    SingularResolvent { condition: f64 },

    #[error("inversion method {0} needs the fast-subsystem generator")]
    MissingFastGenerator(&'static str),

    #[error("times must be ascending and non-negative")]
    InvalidTimes,
}

pub(crate) fn shape_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Shape {
        op,
        detail: detail.into(),
    }
}
