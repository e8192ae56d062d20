use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while validating inputs, fitting parameters or evaluating depths.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepthError {
    #[error("event sequence must contain at least one event")]
    EmptySequence,

    #[error("non-finite value {value} at position {position}")]
    NonFinite { position: usize, value: f64 },

    #[error("event times are not ordered: position {position} ({value}) precedes {previous}")]
    Unordered {
        position: usize,
        value: f64,
        previous: f64,
    },

    #[error("expected {expected} events, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("start time {found} does not match the reference start {expected}")]
    StartMismatch { expected: f64, found: f64 },

    #[error("variance of the last event time must be positive, got {0}")]
    DegenerateVariance(f64),

    #[error("mean duration must be positive, got {0}")]
    NonPositiveDuration(f64),

    #[error("horizon M - start must be positive, got {0}")]
    DegenerateHorizon(f64),

    #[error("gap proportions must be positive and sum to one: {0}")]
    InvalidProportions(String),

    #[error("realization {index} has zero duration (last event equals the start time)")]
    ZeroDuration { index: usize },

    #[error("sample needs at least {required} realizations, found {found}")]
    SampleSize { required: usize, found: usize },

    #[error("covariance matrix is singular even after ridge regularization")]
    SingularCovariance,

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("{method} grids require k = 2, found k = {k}")]
    UnsupportedDimension { method: &'static str, k: usize },

    #[error("the mahalanobis method needs a fitted baseline")]
    MissingBaseline,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Errors from reading or writing data files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {text:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        text: String,
    },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    MixedWidth {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}: {source}")]
    InvalidRow {
        path: PathBuf,
        row: usize,
        #[source]
        source: DepthError,
    },

    #[error("{path}: no data rows")]
    Empty { path: PathBuf },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Depth(#[from] DepthError),
}

pub type Result<T, E = DepthError> = std::result::Result<T, E>;
