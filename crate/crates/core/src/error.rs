use thiserror::Error;

/// Errors raised by state, channel, entropic and region operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("invalid factor permutation: {0}")]
    BadPermutation(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("output label `{0}` collides with an untouched factor")]
    LabelCollision(String),

    #[error("invalid probability distribution: {0}")]
    BadDistribution(String),

    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("Kraus completeness violated (max residual {0:e})")]
    CompletenessViolation(f64),

    #[error("subsystems overlap on label `{0}`")]
    OverlappingSubsystems(String),

    #[error("conditioning system `{label}` is not classical (off-diagonal block norm {residual:e})")]
    NotClassicalConditioner { label: String, residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
