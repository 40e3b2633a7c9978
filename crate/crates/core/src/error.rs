use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("bath of {n} spins exceeds the enumeration limit of {max}; use the Hamming-class path for uniform baths")]
    Capacity { n: usize, max: usize },

    #[error("index {index} out of range for a bath of {n} spins")]
    Range { index: u64, n: usize },

    #[error("Riccati branch undefined for alpha = 0; use the dephasing path")]
    RiccatiBranch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0}")]
    Contract(&'static str),
}
