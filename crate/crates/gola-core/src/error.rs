//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by adapter algebra, partitioning, training, and I/O.
#[derive(Error, Debug)]
pub enum Error {
    /// A matrix axis does not have the required length.
    #[error("shape mismatch on {axis}: expected {expected}, got {actual}")]
    Shape {
        axis: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value failed validation (e.g. out-of-range confidence).
    #[error("invalid value: {0}")]
    Validation(String),

    /// The input is degenerate for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A NaN or infinity appeared where finite values are required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A numeric computation diverged or produced an unusable result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An adapter container file is malformed.
    #[error("container format: {0}")]
    Container(String),

    /// A text input file (CSV, config) could not be parsed.
    #[error("malformed input at {file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 user/input error, 3 I/O error,
    /// 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape { .. }
            | Error::Parameter(_)
            | Error::Validation(_)
            | Error::Degenerate(_)
            | Error::Parse { .. }
            | Error::Json(_) => 2,
            Error::Io(_) | Error::Container(_) => 3,
            Error::NonFinite(_) | Error::Numeric(_) => 4,
        }
    }
}
