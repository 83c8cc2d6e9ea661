use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("raw sample file {path} holds {actual} bytes, header declares {expected}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("invalid annotation at line {line}: {reason}")]
    InvalidAnnotation { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("center sample {center} lacks descriptor context (needs [{min}, {max}] in a channel of {len} samples)")]
    Context {
        center: usize,
        min: usize,
        max: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("labeler index {index} out of range for K = {k}")]
    LabelerOutOfRange { index: usize, k: usize },

    #[error("voting detection requires a labeler encoding scheme")]
    VotingWithoutScheme,

    #[error("coverage gap: labeler {labeler} leaves {channel} uncovered in block [{t0}, {t1}] s of {recording}")]
    CoverageGap {
        recording: String,
        labeler: String,
        channel: String,
        t0: f64,
        t1: f64,
    },

    #[error("insufficient {polarity} events in {context}: need {needed}, found {found}")]
    InsufficientEvents {
        context: String,
        polarity: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("training data error: {0}")]
    TrainingData(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("average precision is undefined without positive labels")]
    NoPositives,

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
