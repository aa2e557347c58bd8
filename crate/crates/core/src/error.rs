use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid format: {0}")]
    Format(String),

    #[error("the zero tensor cannot be analyzed")]
    ZeroTensor,

    #[error("tensor is not concise (slot ranks {ranks:?}, dimensions {dims:?})")]
    NotConcise { ranks: Vec<usize>, dims: Vec<usize> },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("characteristic {p} too small, need p > {bound}")]
    CharacteristicTooSmall { p: u64, bound: u64 },

    #[error("matrix is not nilpotent")]
    NotNilpotent,

    #[error("element does not lie in the centroid: {0}")]
    NotInCentroid(String),

    #[error("nodes must be pairwise distinct")]
    RepeatedNodes,

    #[error("field has fewer than {0} elements")]
    FieldTooSmall(usize),

    #[error("degenerate parameter value: {0}")]
    DegenerateParameter(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Refusals for mathematical scope reasons, as opposed to malformed input.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::ZeroTensor
                | Error::NotConcise { .. }
                | Error::Unsupported(_)
                | Error::CharacteristicTooSmall { .. }
                | Error::NotNilpotent
                | Error::NotInCentroid(_)
                | Error::FieldTooSmall(_)
                | Error::DegenerateParameter(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
