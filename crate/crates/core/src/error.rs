use thiserror::Error;

#[derive(Debug, Error)]
pub enum SkgError {
    #[error("invalid tap profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sample rate {sample_rate} Hz is below Nyquist for bandwidth {bandwidth} Hz")]
    BelowNyquist { sample_rate: f64, bandwidth: f64 },

    #[error("frame of {frame} samples is shorter than the {taps}-tap filter")]
    FrameTooShort { frame: usize, taps: usize },

    #[error("sample vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("need more than k={k} samples, got {n}")]
    TooFewSamples { n: usize, k: usize },

    #[error("incompatible grids: {0}")]
    Grid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SkgError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SkgError {
    SkgError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
