use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("co-occurrence entry ({row}, {col}) is {value}; stored entries must be positive")]
    NonPositiveCount { row: usize, col: usize, value: f64 },

    #[error("word {0} has an empty context support (isolated word)")]
    IsolatedWord(usize),

    #[error("word {word} has support {support} <= dimension {dim}; variance undefined")]
    InsufficientSupport { word: usize, support: usize, dim: usize },

    #[error("rank-deficient row {0}: weighted normal matrix is singular")]
    RankDeficientRow(usize),

    #[error("word {0} is not covered by the covariance store")]
    Uncovered(String),

    #[error("degenerate effect size: association scores have zero spread")]
    DegenerateEffectSize,

    #[error("zero-norm vector: {0}")]
    ZeroVector(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("format error at byte {offset} ({field}): {message}")]
    Format { offset: u64, field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures map to CLI exit code 2; everything else is a
    /// validation error (exit code 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficientRow(_) | Error::DegenerateEffectSize | Error::NonFinite(_)
        )
    }

    pub(crate) fn format(offset: u64, field: &str, message: impl Into<String>) -> Self {
        Error::Format { offset, field: field.to_string(), message: message.into() }
    }
}
