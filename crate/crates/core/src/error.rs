use thiserror::Error;

/// Errors raised by group arithmetic, measures, walks and straightening.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element does not belong to group {group}: {detail}")]
    TypeMismatch { group: String, detail: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("ball enumeration exceeded the cap of {cap} elements (radius {radius})")]
    BallCapExceeded { cap: usize, radius: u32 },

    #[error("coordinate overflow while computing {0}")]
    Overflow(String),

    #[error("censored fraction {fraction:.4} exceeds the limit {limit:.4}")]
    Censoring { fraction: f64, limit: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("rank-deficient generator images (rank {rank}); undetermined directions: {missing}")]
    RankDeficient { rank: usize, missing: String },

    #[error("values are not those of an affine function")]
    Inconsistent,

    #[error("linearization not invertible")]
    NotInvertible,

    #[error("Abelian defect appears unbounded: {0}")]
    Divergent(String),
}

impl Error {
    pub(crate) fn mismatch(group: impl ToString, detail: impl ToString) -> Self {
        Error::TypeMismatch {
            group: group.to_string(),
            detail: detail.to_string(),
        }
    }

    /// True for the resource-limit class (ball caps, overflow).
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::BallCapExceeded { .. } | Error::Overflow(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
