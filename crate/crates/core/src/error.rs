use thiserror::Error;

/// Errors raised by the algebra, certification and Markov routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("vector {index} is linearly dependent on its predecessors")]
    Degenerate { index: usize },

    #[error("{0}")]
    Domain(String),

    #[error("Levi factor is trivial for n = {0}")]
    TrivialLevi(usize),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("numerical rank is indeterminate: {0}")]
    Indeterminate(String),

    #[error("certification failed at stage `{stage}`: {detail}")]
    Certification { stage: String, detail: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejects `n < 2` with the message the command line surfaces verbatim.
pub fn require_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::domain("n must be ≥ 2"))
    } else {
        Ok(())
    }
}
