use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("{stage} failed: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: wvlab_core::Error,
    },
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}

impl CliError {
    /// 1 for a failing computation, 2 for bad input or unusable paths.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline { .. } => 1,
            CliError::Config(_) | CliError::MissingArtifact(_) | CliError::Output { .. } => 2,
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl Fn(wvlab_core::Error) -> CliError + Copy {
        move |source| CliError::Pipeline { stage, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
