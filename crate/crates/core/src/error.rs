//! Error types for every stage of the pipeline.

use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::Feature;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header is missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("no valid rows in {0}")]
    NoValidRows(String),
    #[error("vector lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("zero variance: correlation undefined")]
    ZeroVariance,
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("no divisor configured for feature {0}")]
    MissingDivisor(Feature),
    #[error("divisor for {feature} must be positive and finite, got {value}")]
    InvalidDivisor { feature: Feature, value: f64 },
    #[error("model input {0} is not among the retained features")]
    MissingFeature(Feature),
    #[error("unknown feature name `{0}`")]
    UnknownFeature(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("denominator {denominator:e} at or below the pole floor{}", row_suffix(*row))]
    Singular { row: Option<usize>, denominator: f64 },
    #[error("input must be strictly positive, got {value}{}", row_suffix(*row))]
    NonPositiveInput { row: Option<usize>, value: f64 },
    #[error("non-finite prediction{}", row_suffix(*row))]
    NonFinite { row: Option<usize> },
    #[error("{family} expects {expected} parameters, got {got}")]
    ParamCount {
        family: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("unsupported model file version {0}")]
    Version(u32),
    #[error("invalid model file: {0}")]
    Invalid(String),
    #[error("model file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file json: {0}")]
    Json(#[from] serde_json::Error),
}

fn row_suffix(row: Option<usize>) -> String {
    match row {
        Some(r) => format!(" (row {r})"),
        None => String::new(),
    }
}

impl ModelError {
    /// Attaches a row index to a per-point error.
    pub fn at_row(self, index: usize) -> Self {
        match self {
            ModelError::Singular { denominator, .. } => ModelError::Singular {
                row: Some(index),
                denominator,
            },
            ModelError::NonPositiveInput { value, .. } => ModelError::NonPositiveInput {
                row: Some(index),
                value,
            },
            ModelError::NonFinite { .. } => ModelError::NonFinite { row: Some(index) },
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("{rows} rows is too few for {params} parameters")]
    TooFewRows { rows: usize, params: usize },
    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("every start of the {family} fit was rejected")]
    AllStartsRejected { family: String },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid fit options: {0}")]
    InvalidOptions(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("vector lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot evaluate an empty vector")]
    Empty,
    #[error("{n} rows cannot be split into {k} folds")]
    TooFewRows { n: usize, k: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Debug, Error)]
pub enum OffloadError {
    #[error("candidate set is empty")]
    NoCandidates,
    #[error("candidate set needs exactly one LOCAL node, found {0}")]
    LocalCount(usize),
    #[error("edge node `{id}` refers to path {index} with no segment delay")]
    MissingSegment { id: String, index: usize },
    #[error("edge node `{0}` has no path index")]
    MissingIndex(String),
    #[error("invalid node `{id}`: {reason}")]
    InvalidNode { id: String, reason: String },
    #[error("invalid segment delays: {0}")]
    InvalidSegments(String),
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("hidden model denominator {denominator:e} reaches the pole floor inside the feature box")]
    SingularHidden { denominator: f64 },
    #[error("load {load} must stay below capacity {capacity}")]
    Saturated { load: f64, capacity: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}
