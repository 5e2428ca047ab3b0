use thiserror::Error;

/// Errors raised across the library. Check failures (a distance above tolerance,
/// a validation violation) are reported as data, not as errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsaError {
    #[error("dimension mismatch: {0} vs {1} sites")]
    Dimension(usize, usize),

    #[error("cannot parse Pauli literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("generator does not square to identity: {0}")]
    NotInvolution(String),

    #[error("connector mismatch at site {site}: letter {found} is neither {alpha} nor {beta}")]
    ConnectorMismatch {
        site: usize,
        found: char,
        alpha: char,
        beta: char,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {what} needs {needed} qubits, limit is {limit}")]
    Resource {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("encoding error: {0}")]
    Encoding(String),
}

pub type Result<T> = std::result::Result<T, QsaError>;
