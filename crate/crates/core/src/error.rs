use thiserror::Error;

/// Errors raised by the analysis toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A probability list does not sum to one.
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    /// Matrix shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A statistic needed by an estimator was not observed.
    #[error("missing statistic {0}")]
    MissingStatistic(String),

    /// The observed statistics admit no attack (empty feasible set).
    #[error("infeasible statistics: {0}")]
    Infeasible(String),

    /// An attack never yields a key-distillation iteration.
    #[error("degenerate attack: normalization {0:e} is too small")]
    DegenerateAttack(f64),

    /// A threshold search could not bracket a sign change.
    #[error("degenerate search: {0}")]
    DegenerateSearch(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
