use thiserror::Error;

/// Errors raised by the geometry, map, energy, optimizer and morph layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("flow fold: {0}")]
    FlowFold(String),
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("morph fold at t = {time}: {reason}")]
    MorphFold { time: f64, reason: String },
    #[error("non-monotone volume path: {0}")]
    NonMonotoneVolume(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::InvalidMap(_) => "invalid-map",
            Error::DomainMismatch(_) => "domain-mismatch",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::FlowFold(_) => "flow-fold",
            Error::InsufficientResolution(_) => "insufficient-resolution",
            Error::HypothesisViolation(_) => "hypothesis-violation",
            Error::InvalidSchedule(_) => "invalid-schedule",
            Error::MorphFold { .. } => "morph-fold",
            Error::NonMonotoneVolume(_) => "non-monotone-volume",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
