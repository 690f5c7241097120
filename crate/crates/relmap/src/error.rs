use thiserror::Error;

/// Errors produced by parameter construction, inversion and trace ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain or a file is malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested combination of requirements/parameters cannot be met by
    /// any per-cycle channel (e.g. it would need a mean run shorter than one
    /// cycle).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A numerical routine failed to converge or hit a singular system.
    /// Indicates a bug for in-domain inputs.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
