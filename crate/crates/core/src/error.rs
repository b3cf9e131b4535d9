use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("parse error at row {row}, column {col}: {message}")]
    ParseError {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFiniteValue { column: String, row: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("split leaves an empty partition (n = {n_rows}, train fraction = {train_fraction})")]
    DegenerateSplit { n_rows: usize, train_fraction: f64 },
    #[error("column `{0}` has zero variance")]
    DegenerateVariance(String),
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("input too short: need at least {required} values, got {actual}")]
    TooShort { required: usize, actual: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("probability {0} outside [0, 1] or not sorted")]
    InvalidProbability(f64),
    #[error("smoothing factor {0} outside (0, 1]")]
    InvalidAlpha(f64),
    #[error("unsupported image depth: {0}")]
    UnsupportedDepth(String),
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("estimation did not converge after {iterations} iterations")]
    FailedConvergence { iterations: usize },
    #[error("match dated {match_date} is after the reference date {reference_date}")]
    FutureMatch {
        match_date: chrono::NaiveDate,
        reference_date: chrono::NaiveDate,
    },
    #[error("schedule is disconnected: teams {0:?} never meet the rest")]
    DisconnectedSchedule(Vec<String>),
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("invalid match record: {0}")]
    InvalidMatch(String),

    #[error("too few rows: need {required}, got {actual}")]
    TooFewRows { required: usize, actual: usize },
    #[error("mtry = {mtry} is invalid for {n_features} features")]
    InvalidMtry { mtry: usize, n_features: usize },
    #[error("learning rate {0} outside (0, 1]")]
    InvalidRate(f64),
    #[error("feature `{0}` missing from input")]
    MissingFeature(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}
