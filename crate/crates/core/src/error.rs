//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside its mathematical domain (time out of range,
    /// token outside the vocabulary, negative weight, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A decoded token pair does not form a valid interval. This signals a
    /// model emission error, not a crash; callers surface it in reports.
    #[error("malformed interval: start token {start} > end token {end}")]
    MalformedInterval { start: u32, end: u32 },

    /// Operands have incompatible shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// A structure could not be assembled from the given parts.
    #[error("construction error: {0}")]
    Construction(String),

    /// Reference-token injection received an inconsistent slot map.
    #[error("injection error: {0}")]
    Injection(String),

    /// An operation that needs at least one element received none.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A line of a manifest or predictions file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// File schema version differs from the supported one.
    #[error("unsupported schema version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    /// Input data is structurally valid but semantically inconsistent.
    #[error("data error: {0}")]
    Data(String),

    /// Invalid configuration key or value.
    #[error("config error: {0}")]
    Config(String),

    /// Training produced non-finite or diverging values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
