//! Command-line tools and the session service for `hexlens`.

pub mod args;
pub mod commands;
pub mod report;
pub mod service;

use std::path::PathBuf;

use hexlens_core::mesh::MeshError;
use hexlens_core::quality::MetricError;
use hexlens_core::render::RenderError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Mesh { path: PathBuf, source: MeshError },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
