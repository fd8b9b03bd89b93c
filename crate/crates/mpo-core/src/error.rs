//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),

    #[error("storage error: {0}")]
    Storage(String),

    #[error("manifest error at line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    /// Extraction found no label or capture. Callers score this as an
    /// incorrect answer rather than aborting.
    #[error("no answer could be extracted")]
    NoAnswer,

    #[error("result set is empty")]
    EmptyResults,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A prompt produced no wrong answers within the attempt cap.
    #[error("no failures collected within the attempt cap")]
    NoFailures,

    #[error("backend error: {0}")]
    Backend(String),

    #[error("backend returned an empty feedback response")]
    EmptyFeedback,

    #[error("parse error: missing or unclosed tags: {}", missing.join(", "))]
    Parse { missing: Vec<String> },

    #[error("operator not applicable: {0}")]
    OperatorInapplicable(String),

    #[error("mix requires two distinct parents")]
    InvalidPartner,

    #[error("template error: unbound placeholder `{0}`")]
    Template(String),

    /// Non-retriable backend misconfiguration (e.g. an HTTP 4xx).
    #[error("backend configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("run aborted: {0}")]
    RunAborted(String),
}

impl Error {
    pub fn storage(err: impl std::fmt::Display) -> Self {
        Error::Storage(err.to_string())
    }

    pub fn backend(err: impl std::fmt::Display) -> Self {
        Error::Backend(err.to_string())
    }
}
