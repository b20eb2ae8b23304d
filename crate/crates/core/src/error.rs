use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: f64, actual: f64 },

    #[error("sample {index} has magnitude {value} above peak amplitude {limit}")]
    AmplitudeExceeded {
        index: usize,
        value: f64,
        limit: f64,
    },

    #[error("doppler spread {doppler_hz} Hz is not below half the output rate ({nyquist_hz} Hz)")]
    DopplerTooHigh { doppler_hz: f64, nyquist_hz: f64 },

    #[error("input is empty")]
    Empty,

    #[error("input is silent")]
    Silent,

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable identifier for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::RateMismatch { .. } => "rate-mismatch",
            Error::AmplitudeExceeded { .. } => "amplitude-exceeded",
            Error::DopplerTooHigh { .. } => "doppler-too-high",
            Error::Empty => "empty-input",
            Error::Silent => "silent-input",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
