use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration value; `key` names the offending field or flag.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge within {panels} panels (last estimates {previous:e} and {last:e})")]
    NotConverged { panels: usize, previous: f64, last: f64 },

    #[error("at {frequency_hz} Hz: {source}")]
    AtFrequency {
        frequency_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("sweep grids differ starting at index {index}: {message}")]
    Alignment { index: usize, message: String },

    /// Measured amplitude exceeds the reference by more than the clamp tolerance.
    #[error("calibration inconsistent: ln ratio {ln_ratio} exceeds +{tolerance}")]
    CalibrationInconsistent { ln_ratio: f64, tolerance: f64 },

    #[error("no peak: salience is non-positive everywhere")]
    NoPeak,

    #[error("peak at grid boundary (index {index})")]
    BoundaryPeak { index: usize },
}

/// Broad category used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Format,
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } | Error::Alignment { .. } => ErrorKind::Input,
            Error::Parse { .. } | Error::Format(_) => ErrorKind::Format,
            Error::AtFrequency { source, .. } => source.kind(),
            Error::Domain(_)
            | Error::Numerical(_)
            | Error::NotConverged { .. }
            | Error::CalibrationInconsistent { .. }
            | Error::NoPeak
            | Error::BoundaryPeak { .. } => ErrorKind::Numerical,
        }
    }
}
