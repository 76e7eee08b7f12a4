use std::path::PathBuf;

use crate::signals::SignalName;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: expected {expected} vector components, found {found}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("document {id} has no tokenizable sentences")]
    EmptyDocument { id: String },

    #[error("document {id}: {message}")]
    InvalidDocument { id: String, message: String },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no precomputed vector for {0}")]
    MissingVector(String),

    #[error("topic {0:?} has no keywords after normalization")]
    NoKeywords(String),

    #[error("signal matrix for {doc_id}/{topic:?} has no signals")]
    NoSignals { doc_id: String, topic: String },

    #[error("signal {name} for {doc_id}: {message}")]
    InvalidSignal {
        doc_id: String,
        name: SignalName,
        message: String,
    },

    #[error("fusion weights are zero on every present signal ({0:?})")]
    ZeroWeights(Vec<SignalName>),

    #[error("invalid fusion weight {weight} for {name}")]
    InvalidWeight { name: SignalName, weight: f64 },

    #[error("soft target {0} outside [0, 1]")]
    TargetOutOfRange(f64),

    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("feature width mismatch: scorer has {expected} weights, features have {found}")]
    FeatureWidth { expected: usize, found: usize },

    #[error("no reference for {}", .0.join(", "))]
    MissingReference(Vec<String>),

    #[error("cannot render a report with no rows")]
    EmptyReport,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
