use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("estimation failed: {0}")]
    Estimation(#[source] choselect::Error),

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("replicate {replicate}, estimator {estimator}: {source}")]
    Replicate {
        replicate: usize,
        estimator: String,
        #[source]
        source: Box<BenchError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    /// Process exit status, one per error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Parse(_) => 2,
            BenchError::Config(_) => 3,
            BenchError::Estimation(_) => 4,
            BenchError::UnsupportedScheme(_) => 5,
            BenchError::Replicate { source, .. } => source.exit_code(),
            BenchError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<choselect::Error> for BenchError {
    fn from(e: choselect::Error) -> Self {
        match e.root() {
            choselect::Error::Config(msg) => BenchError::Config(msg.clone()),
            _ => BenchError::Estimation(e),
        }
    }
}
