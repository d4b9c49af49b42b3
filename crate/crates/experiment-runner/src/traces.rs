use crate::config::AnalysisFlags;
use crate::{io_err, RunnerError};
use ewa_agent::EwaParams;
use game_core::GameSpec;
use llm_agent::{ModelRef, ReasoningTrace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Completion marker and run index, written last. Timestamps make the
/// manifest the one run artifact that is not byte-stable across re-runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub samples_per_cell: u32,
    pub game: GameSpec,
    pub template_versions: TemplateVersions,
    pub backend: BackendIdentity,
    pub ewa: EwaParams,
    pub analysis: AnalysisFlags,
    pub started_at: String,
    pub finished_at: String,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateVersions {
    pub description: String,
    pub prompt: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendIdentity {
    pub kind: crate::config::BackendChoice,
    pub models: Vec<ModelRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub cell_id: String,
    pub ordinal: u32,
    pub episodes: u32,
    pub valid: u32,
    pub invalid: u32,
    pub failed: u32,
    /// Completions recorded from the backend (0 for EWA cells; episodes
    /// that died in transport retries leave no recorded completion).
    pub llm_calls: u64,
    /// Completions that crossed the network (0 under the stub).
    pub network_calls: u64,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub matches_complete: u32,
    pub matches_incomplete: u32,
}

/// One post-hoc pairing of two episodes of the same cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchRow {
    pub cell_id: String,
    pub episode_i: u32,
    pub episode_j: u32,
    pub guess_i: Option<i64>,
    pub guess_j: Option<i64>,
    pub utility_i: Option<f64>,
    pub utility_j: Option<f64>,
    pub complete: bool,
}

pub fn traces_dir(run_dir: &Path) -> PathBuf {
    run_dir.join("traces")
}

pub fn manifest_path(run_dir: &Path) -> PathBuf {
    run_dir.join("manifest.json")
}

pub fn cell_trace_path(run_dir: &Path, cell_id: &str) -> PathBuf {
    traces_dir(run_dir).join(format!("{cell_id}.jsonl"))
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunnerError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    std::fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

pub fn write_traces(path: &Path, traces: &[ReasoningTrace]) -> Result<(), RunnerError> {
    let mut out = Vec::new();
    for trace in traces {
        serde_json::to_writer(&mut out, trace)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

/// Read a trace file leniently: unparseable lines (e.g. a truncated tail
/// after an interrupted run) are dropped. Returns episode-indexed traces.
pub fn read_traces_lenient(path: &Path) -> BTreeMap<u32, ReasoningTrace> {
    let mut by_episode = BTreeMap::new();
    let Ok(text) = std::fs::read_to_string(path) else {
        return by_episode;
    };
    for line in text.lines() {
        if let Ok(trace) = serde_json::from_str::<ReasoningTrace>(line) {
            by_episode.insert(trace.episode, trace);
        }
    }
    by_episode
}

/// Strict read for analysis: every line must parse.
pub fn read_traces(path: &Path) -> Result<Vec<ReasoningTrace>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut traces = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trace: ReasoningTrace = serde_json::from_str(line).map_err(|e| {
            RunnerError::Traces(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
        traces.push(trace);
    }
    Ok(traces)
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest, RunnerError> {
    let path = manifest_path(run_dir);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_manifest(run_dir: &Path, manifest: &RunManifest) -> Result<(), RunnerError> {
    let json = serde_json::to_string_pretty(manifest)?;
    write_atomic(&manifest_path(run_dir), json.as_bytes())
}
