use std::path::PathBuf;

/// Errors produced anywhere in the assessment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("image `{id}` is {width}x{height}, smaller than the {patch}x{patch} patch size")]
    UndersizedImage {
        id: String,
        width: usize,
        height: usize,
        patch: usize,
    },

    #[error("no usable images in {0}")]
    NoUsableImages(String),

    #[error("checkpoint fingerprint does not match the natural model (model built for {expected}, got {actual})")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("malformed {kind} file: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{0} evaluation group(s) incomplete; see the report")]
    IncompleteEvaluation(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }
}
