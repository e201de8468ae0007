use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("out-of-vocabulary words: {}", .words.join(", "))]
    OutOfVocabulary { words: Vec<String> },

    #[error("no alternate pronunciations")]
    NoAlternatePronunciations,

    #[error("empty phoneme sequence")]
    EmptySequence,

    #[error("unknown phoneme `{0}`")]
    UnknownPhoneme(String),

    #[error("invalid phoneme symbol `{0}`")]
    InvalidPhoneme(String),

    #[error("duplicate skill id `{0}`")]
    DuplicateSkill(String),

    #[error("unknown skill id `{0}`")]
    UnknownSkill(String),

    #[error("delta base version {delta} does not match table version {table}")]
    VersionMismatch { table: u64, delta: u64 },

    #[error("tables were built with different thresholds ({old} vs {new})")]
    ThresholdMismatch { old: f64, new: f64 },

    #[error("threshold grid is empty")]
    EmptyGrid,

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
