use thiserror::Error;

/// Errors raised by mesh handling, assembly and the linear algebra layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(
        "singular kernel evaluation: x[{row}] and y[{col}] are {distance:e} apart; regularize the near field instead"
    )]
    SingularEvaluation { row: usize, col: usize, distance: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("dense assembly needs about {required} bytes, above the cap of {cap} bytes; use the compressed variant with a tolerance")]
    DenseTooLarge { required: u64, cap: u64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("iterative solver broke down after {iterations} iterations (relative residual {residual:e})")]
    Breakdown {
        iterations: usize,
        residual: f64,
        iterate: Vec<num_complex::Complex64>,
    },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
