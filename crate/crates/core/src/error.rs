use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite { what: &'static str, row: usize, col: usize },

    #[error("constant column {0}: cannot standardize")]
    ConstantColumn(usize),

    #[error("eta = {value} at row {row} lies outside the link domain {domain}")]
    DomainViolation { row: usize, value: f64, domain: String },

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("refit underdetermined: support of size {support} needs at most n - 2 = {limit}")]
    RefitUnderdetermined { support: usize, limit: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PicError {
    fn from(e: std::io::Error) -> Self {
        PicError::Io(e.to_string())
    }
}

impl From<csv::Error> for PicError {
    fn from(e: csv::Error) -> Self {
        PicError::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PicError>;
