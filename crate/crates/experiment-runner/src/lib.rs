//! Orchestration layer: experiment configs, the simulation matrix, trace
//! persistence, the analysis pipeline, out-of-sample validation and the
//! table/figure renderer. The `pbeauty` binary is a thin CLI over this.

pub mod analyze;
pub mod config;
pub mod oos;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod svg;
pub mod traces;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("output directory {0} already contains a completed run (manifest.json); pass --resume to continue or choose another directory")]
    AlreadyComplete(String),
    #[error("missing baseline: {0}")]
    MissingBaseline(String),
    #[error("trace data error: {0}")]
    Traces(String),
    #[error(transparent)]
    Data(#[from] human_data::DataError),
    #[error("statistics error: {0}")]
    Stats(#[from] stat_lab::StatError),
    #[error(transparent)]
    Ewa(#[from] ewa_agent::EwaError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    }
}
