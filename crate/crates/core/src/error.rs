use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its valid domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input violates a precondition of the operation (too short, empty, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The input is well-formed but carries no information for this metric.
    #[error("{metric}: degenerate input ({reason})")]
    Degenerate { metric: &'static str, reason: String },

    /// A component failure inside a multi-metric analysis.
    #[error("{metric}: {source}")]
    InMetric { metric: &'static str, source: Box<Error> },

    /// Synthesis or analysis of one dataset item failed.
    #[error("stimulus {spec}: {source}")]
    Stimulus { spec: String, source: Box<Error> },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("training failed: {0}")]
    Training(String),

    /// An artifact (model, split, sidecar) does not belong to the data it was paired with.
    #[error("artifact mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Attaches the metric name unless the error already carries it.
    pub(crate) fn in_metric(self, metric: &'static str) -> Self {
        match self {
            e @ (Error::Degenerate { .. } | Error::InMetric { .. }) => e,
            e => Error::InMetric { metric, source: Box::new(e) },
        }
    }

    pub(crate) fn degenerate(metric: &'static str, reason: impl Into<String>) -> Self {
        Error::Degenerate { metric, reason: reason.into() }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    }
}
