use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShadowError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator entries do not form a 2^{n_qubits} x 2^{n_qubits} matrix")]
    BadShape { n_qubits: usize },

    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("trace {found} differs from expected {expected}")]
    BadTrace { expected: f64, found: f64 },

    #[error("operator is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("Kraus set is not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),

    #[error("Kraus set is empty")]
    NoKrausOperators,

    #[error("partial trace needs an even number of qubits, got {0}")]
    OddQubitCount(usize),

    #[error("Choi normalization flag inconsistent with its trace ({0})")]
    NormalizationMismatch(f64),

    #[error("{what} supports {range}, got {found}")]
    UnsupportedSize {
        what: &'static str,
        range: &'static str,
        found: usize,
    },

    #[error("diagonal probability mass {0} deviates from 1")]
    ProbabilityMass(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid group count K = {k} for {len} values")]
    InvalidGroupCount { k: usize, len: usize },

    #[error("ensemble mismatch: {0}")]
    EnsembleMismatch(&'static str),

    #[error("support of a dense observable must be declared for the Pauli ensemble")]
    UnknownSupport,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("tableau is not symplectic")]
    NotSymplectic,
}

pub type Result<T, E = ShadowError> = std::result::Result<T, E>;
