use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("{path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("record set is missing phase {index} (expected {path})")]
    MissingPhase { index: usize, path: PathBuf },
    #[error("record set is missing pulse run {index} (expected {path})")]
    MissingPulse { index: usize, path: PathBuf },
    #[error("{path}: does not match the sidecar: {reason}")]
    SidecarMismatch { path: PathBuf, reason: String },
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error(transparent)]
    Core(#[from] pentomo_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Self {
        let path = path.into();
        move |source| Self::Json { path, source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Self {
        let path = path.into();
        move |source| Self::Csv { path, source }
    }
}
