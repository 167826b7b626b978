use std::fmt;

use thiserror::Error;

/// A syntax or validation error located in some input text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub message: String,
    /// Byte offset into the input.
    pub position: usize,
}

impl ParseError {
    pub fn new(message: impl Into<String>, position: usize) -> Self {
        Self {
            message: message.into(),
            position,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at byte {})", self.message, self.position)
    }
}

/// Resource ceilings that can stop a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ceiling {
    GroupOrder,
    Enumeration,
    ModuleDimension,
    SolverColumns,
}

impl fmt::Display for Ceiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Ceiling::GroupOrder => "group order",
            Ceiling::Enumeration => "element enumeration",
            Ceiling::ModuleDimension => "module dimension",
            Ceiling::SolverColumns => "solver columns",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("invalid power-conjugate presentation: {0}")]
    InvalidPresentation(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("presentation is inconsistent ({failures} failing test words)")]
    Inconsistent { failures: usize },

    #[error("{0} ceiling exceeded: {1} > {2}")]
    CeilingExceeded(Ceiling, u128, u128),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("no image given for generator {0}")]
    MissingImage(usize),

    #[error("invalid epimorphism: {0}")]
    InvalidEpimorphism(String),

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
