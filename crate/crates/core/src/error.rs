use thiserror::Error;

/// Input text could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tautological clause on variable {0}")]
    Tautology(u32),
    #[error("variable {var} exceeds declared {num_vars} variables")]
    VarOutOfRange { var: u32, num_vars: u32 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{what} has {actual} elements, brute force is limited to {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
