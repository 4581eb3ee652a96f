//! Crate-wide error type. Every variant carries a stable code (`E_*`) so the
//! CLI can prefix stderr output consistently.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input row; `line` is 1-based within the offending file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition or invariant on the inputs does not hold.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A required input (file, label set, store entry) is absent.
    #[error("missing input: {0}")]
    MissingInput(String),

    /// A statistic is undefined on the given data (e.g. zero variance).
    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    /// Regression design matrix is singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// A non-finite value surfaced mid-computation; `where_` names the stage.
    #[error("non-finite value in {where_}")]
    NonFinite { where_: String },
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn non_finite(where_: impl Into<String>) -> Self {
        Error::NonFinite {
            where_: where_.into(),
        }
    }

    /// Stable machine-readable code for stderr prefixes and exit reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "E_IO",
            Error::Parse { .. } => "E_PARSE",
            Error::Invalid(_) => "E_INVALID",
            Error::MissingInput(_) => "E_MISSING_INPUT",
            Error::Degenerate(_) => "E_DEGENERATE",
            Error::Singular(_) => "E_SINGULAR",
            Error::NonFinite { .. } => "E_NONFINITE",
        }
    }
}
