use thiserror::Error;

/// Errors produced by state construction, network loading and the bound/protocol calculators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized: squared norm {0} deviates from 1 beyond tolerance")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian: max asymmetry {0}")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite: min eigenvalue {0}")]
    NotPsd(f64),

    #[error("input out of range: {0}")]
    OutOfRange(String),

    #[error("network file parse error: {0}")]
    Parse(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network graph is disconnected (vertex {0} unreachable from vertex 1)")]
    Disconnected(usize),

    #[error("graph is not a tree: {0}")]
    NotATree(String),

    #[error("edge ({u},{v}): {reason}")]
    UnsupportedEdgeState { u: usize, v: usize, reason: String },

    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("operation precondition not met: {0}")]
    Precondition(String),

    #[error("packing violates capacities on edge ({0},{1})")]
    CapacityViolation(usize, usize),

    #[error("internal numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code category: 1 for input/validation problems, 2 for size or capability limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LimitExceeded(_) | Error::Precondition(_) | Error::UnsupportedEdgeState { .. } => 2,
            _ => 1,
        }
    }
}
