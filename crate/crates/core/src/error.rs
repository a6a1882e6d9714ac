use thiserror::Error;

/// Errors produced by the encoding, decoding and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("atom location {0} is not a finite real number")]
    InvalidLocation(f64),

    #[error("duplicate atom location {0}")]
    DuplicateLocation(f64),

    /// The quantizer is only stable for inputs with `max |y_k| <= A`.
    #[error("input out of range: max |y_k| = {norm} exceeds the bound A = {bound}")]
    InputOutOfRange { norm: f64, bound: f64 },

    /// The data does not carry `S` significant singular values.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
