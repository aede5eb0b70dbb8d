use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, ensemble and IO layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("energy balance matrix is singular (degenerate parameters)")]
    SingularMatrix,

    #[error("period {period}: {source}")]
    AtPeriod {
        period: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("period index {0} outside 1..={1}")]
    PeriodOutOfRange(usize, usize),

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("empty overlap between series")]
    EmptyOverlap,

    #[error("objective not finite at control vector {0:?}")]
    NonFiniteObjective(Vec<f64>),

    #[error("infeasible bounds at index {index}: lower {lower} > upper {upper}")]
    InfeasibleBounds { index: usize, lower: f64, upper: f64 },

    #[error("skew-normal fit failed: {0}")]
    SkewNormalFit(String),

    #[error("malformed distribution descriptor `{0}`")]
    Descriptor(String),

    #[error("resampling failed: {0}")]
    Resample(String),

    #[error("ensemble: {0}")]
    Ensemble(String),

    #[error("missing data file {path}")]
    MissingFile { path: PathBuf },

    #[error("{path}: {reason}")]
    BadData { path: PathBuf, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn at_period(self, period: usize) -> Self {
        Error::AtPeriod {
            period,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
