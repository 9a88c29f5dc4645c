use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("disconnected-in-expectation: q = 0 with {blocks} blocks leaves kappa undefined")]
    DisconnectedInExpectation { blocks: usize },

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("graph is disconnected; spectral and hitting computations require a connected graph")]
    Disconnected,

    #[error("isolated vertex {vertex}: graph violates connectivity assumption")]
    IsolatedVertex { vertex: usize },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures caused by the numerics rather than by the user's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}
