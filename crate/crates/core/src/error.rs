use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown element `{0}` (expected He, Ne or Ar)")]
    UnknownElement(String),

    #[error("series of length {len} is shorter than {blocks} blocks")]
    SeriesTooShort { len: usize, blocks: usize },

    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{method}: exponent range {range:.1} exceeds 700 at {state}")]
    Overflow {
        method: &'static str,
        state: String,
        range: f64,
    },

    #[error("run `{run_id}` failed at cycle {cycle}: {source}")]
    Persistence {
        run_id: String,
        cycle: u64,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error("estimator {estimator} needs missing column `{column}`")]
    MissingColumn {
        column: &'static str,
        estimator: &'static str,
    },

    #[error("{0}")]
    NotConverged(String),

    #[error("oracle checks failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::UnknownElement(_) => "unknown_element",
            Error::SeriesTooShort { .. } => "series_too_short",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::Overflow { .. } => "overflow",
            Error::Persistence { .. } => "persistence",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::MissingColumn { .. } => "missing_column",
            Error::NotConverged(_) => "not_converged",
            Error::VerificationFailed(_) => "verification_failed",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
