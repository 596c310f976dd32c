use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// The LU factorization met a pivot too small relative to the largest one.
    #[error("singular or near-singular system (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    /// A closed-form amplification factor was evaluated at its pole.
    #[error("amplification factor has a pole at x = {x}")]
    Pole { x: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("constraint violated for `{key}`: {msg}")]
    Constraint { key: String, msg: String },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
