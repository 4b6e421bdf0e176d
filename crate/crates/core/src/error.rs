use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("node count mismatch: {0} vs {1}")]
    NodeCountMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An analysis was asked for on a graph that does not satisfy its
    /// preconditions (wrong zero multiplicity, negative weights, ...).
    #[error("premise violated: {0}")]
    Premise(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    /// An internal consistency check failed. Indicates a numerical or
    /// construction problem rather than bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
