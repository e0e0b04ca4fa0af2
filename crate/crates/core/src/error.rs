use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("truncation mismatch between operands")]
    TruncationMismatch,

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("form is not closed")]
    NotClosed,

    #[error("no primitive: closed 0-form with nonzero constant term")]
    NoPrimitive,

    #[error("hbar exponent {exponent} falls below the laurent floor {floor}")]
    FloorViolation { exponent: i32, floor: i32 },

    #[error("iteration did not stabilise within the degree cap {0}")]
    NonConvergence(i32),

    #[error("insufficient order: {0}")]
    InsufficientOrder(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unknown example {0:?}")]
    UnknownExample(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("matrix is not invertible")]
    NotInvertible,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("invalid cohomology declaration: {0}")]
    InvalidDecl(String),

    #[error("residual is not exact under the declared basis")]
    NotExactUnderDecl,

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
