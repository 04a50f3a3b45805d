use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid structure constants: {0}")]
    Structure(String),

    #[error("Jacobi identity fails at basis triple ({i}, {j}, {k})")]
    Jacobi { i: usize, j: usize, k: usize },

    #[error("{which} is not a subalgebra: bracket of basis vectors {i} and {j} leaves the span")]
    NotSubalgebra {
        which: &'static str,
        i: usize,
        j: usize,
    },

    #[error("direct sum failure: {0}")]
    DirectSum(String),

    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("trajectory diverged; last finite state at step {last_valid}")]
    Divergence { last_valid: usize },

    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
