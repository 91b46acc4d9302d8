use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid node set: {0}")]
    InvalidNodeSet(String),

    #[error("duplicate node at indices {first} and {second}")]
    DuplicateNodes { first: usize, second: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is numerically singular (pivot {pivot:.3e} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },

    #[error("degenerate stencil at node {node}: normal equations rank-deficient")]
    DegenerateStencil { node: usize },

    #[error("unknown kernel name {0:?} (expected one of g, imq, m2, m4, w2, w4)")]
    UnknownKernel(String),

    #[error("unknown test function {0:?}")]
    UnknownFunction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
