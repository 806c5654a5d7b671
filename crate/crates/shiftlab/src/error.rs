use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenvalue iteration did not converge (residual {residual:e})")]
    EigenNoConvergence { residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("series recurrence did not converge after {iterations} iterations (last change {last_change:e}, contraction proxy s/|lambda|^2 = {ratio:.4})")]
    SeriesNoConvergence {
        iterations: usize,
        last_change: f64,
        ratio: f64,
    },
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
