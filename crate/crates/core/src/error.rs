use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in column {column} ({name:?}): {reason}")]
    Schema {
        column: usize,
        name: String,
        reason: String,
    },

    #[error("frame ordering error at row {row}: expected frame {expected}, found {found}")]
    Ordering { row: usize, expected: u64, found: String },

    #[error("coordinate {value} at row {row}, column {name:?} is outside the accepted range")]
    Range { row: usize, name: String, value: f64 },

    #[error("landmark {name} is half-present at row {row} (x and y must both be present or both empty)")]
    PartialLandmark { row: usize, name: String },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("invalid JSON in {path}: {reason}")]
    Json { path: PathBuf, reason: String },

    #[error("invalid cut points: {0}")]
    Cut(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("unknown selection strategy {0:?}")]
    UnknownStrategy(String),

    #[error("landmark {0} is not present in the sequence")]
    MissingLandmark(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("need at least 3 distinct signers for nested leave-one-person-out, found {0}")]
    InsufficientSigners(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("label {0:?} is not in the class set")]
    UnknownLabel(String),

    #[error("stage name mismatch: {0}")]
    StageMismatch(String),

    #[error("stage {stage} failed: {reason}")]
    StageFailed { stage: String, reason: String },

    #[error("image error: {0}")]
    Image(String),

    #[error("trainer error: {0}")]
    Trainer(String),
}

impl Error {
    /// The message followed by every underlying cause, `: `-separated.
    pub fn full_message(&self) -> String {
        let mut msg = self.to_string();
        let mut cause = std::error::Error::source(self);
        while let Some(c) = cause {
            msg.push_str(": ");
            msg.push_str(&c.to_string());
            cause = c.source();
        }
        msg
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Json {
            path: path.into(),
            reason: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
