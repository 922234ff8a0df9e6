use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} exceeds the configured limit {limit}")]
    Capacity { value: u64, limit: u64 },

    #[error("{0} is outside the domain")]
    Domain(String),

    #[error("{value} is not a member of {filter}")]
    NotMember { value: u64, filter: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no sign change found for the root search: {0}")]
    Bracket(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("export failed: {0}")]
    Export(String),
}

pub type Result<T> = std::result::Result<T, Error>;
