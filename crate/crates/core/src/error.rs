use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based; 0 means the whole input.
    #[error("{format} parse error at line {line}: {message}")]
    Parse {
        format: &'static str,
        line: usize,
        message: String,
    },

    /// Construct outside the supported structural Verilog subset.
    #[error("unsupported construct `{construct}` at {line}:{column}")]
    Unsupported {
        construct: String,
        line: usize,
        column: usize,
    },

    /// Structurally parseable input that violates a schema or consistency rule.
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller broke an operation's precondition (shapes, positivity, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Inconsistent or incomplete configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operation invoked on an object in the wrong state.
    #[error("state error: {0}")]
    State(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("unsupported model file version {found} (this build reads version {supported})")]
    ModelVersion { found: u32, supported: u32 },

    #[error("I/O error")]
    Io(#[from] io::Error),

    #[error("JSON error")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(format: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            format,
            line,
            message: message.into(),
        }
    }

    /// True for errors that indicate a programming/contract bug rather than bad input.
    pub fn is_contract_violation(&self) -> bool {
        matches!(self, Error::Contract(_))
    }
}
