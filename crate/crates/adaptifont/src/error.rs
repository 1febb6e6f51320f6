use std::path::PathBuf;

use adaptifont_core::analysis::AnalysisError;
use adaptifont_core::fontgen::FontGenError;
use adaptifont_core::fontspace::FontSpaceError;
use adaptifont_core::optimizer::OptimizerError;
use adaptifont_core::session::SessionError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: line {line}: {source}")]
    JsonLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: malformed image: {reason}")]
    Image { path: PathBuf, reason: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    FontSpace(#[from] FontSpaceError),
    #[error(transparent)]
    FontGen(#[from] FontGenError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Self {
        let path = path.into();
        move |source| Error::Json { path, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
