use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NonPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (max |V - V^T| = {deviation:e})")]
    AsymmetricInput { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeIndex { index: usize, modes: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("truncation error: tail mass {tail_mass:e} exceeds tolerance {tolerance:e}{}",
        .needed_cutoff.map(|c| format!(" (cutoff {c} needed)")).unwrap_or_default())]
    Truncation {
        tail_mass: f64,
        tolerance: f64,
        needed_cutoff: Option<usize>,
    },

    #[error("beam splitter output overflows cutoffs: discarded weight {discarded:e} exceeds {tolerance:e}")]
    CutoffOverflow { discarded: f64, tolerance: f64 },

    #[error("local unitary does not preserve photon number")]
    NotNumberPreserving,

    #[error("root is not bracketed: imbalance {lo} at 0 and {hi} at N")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("schema error in field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{kind} `{name}` is already registered")]
    DuplicateStrategy { kind: &'static str, name: String },

    #[error("cannot write `{path}`: {reason}")]
    Output { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
