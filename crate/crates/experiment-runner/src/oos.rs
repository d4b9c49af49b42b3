use crate::analyze::{write_csv, write_json};
use crate::config::ResolvedExperiment;
use crate::simulate::simulate;
use crate::traces::{cell_trace_path, read_manifest, read_traces};
use crate::RunnerError;
use llm_agent::{AgentKind, ContextKind};
use serde::{Deserialize, Serialize};
use stat_lab::{choose_test, sophistication_score, stars, wasserstein_1d, TestKind};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidityRow {
    pub cell_id: String,
    pub agent_kind: AgentKind,
    pub model_id: String,
    pub context: ContextKind,
    pub moa: bool,
    pub sophistication: u32,
    pub episodes: u32,
    pub valid: u32,
    pub validity_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OosRow {
    pub cell_id: String,
    pub agent_kind: AgentKind,
    pub model_id: String,
    pub context: ContextKind,
    pub moa: bool,
    pub n_baseline: usize,
    pub n_shifted_valid: usize,
    /// Wasserstein distance between the baseline distribution and the
    /// shift-normalized out-of-sample distribution.
    pub wasserstein: Option<f64>,
    pub test_kind: Option<TestKind>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub star: String,
}

/// Run the shifted-range treatment: simulate the shifted config, compute
/// per-cell validity ratios, normalize valid shifted guesses back onto the
/// baseline range, and compare against the baseline distributions.
pub fn run_oos(
    shifted: &ResolvedExperiment,
    shifted_run_dir: &Path,
    baseline_run_dir: &Path,
    metrics_out: &Path,
    resume: bool,
) -> Result<(), RunnerError> {
    let baseline_manifest = read_manifest(baseline_run_dir).map_err(|_| {
        RunnerError::MissingBaseline(format!(
            "{} has no completed run manifest",
            baseline_run_dir.display()
        ))
    })?;

    let shift = shifted.game.low() - baseline_manifest.game.low();
    if shifted.game.n_actions() != baseline_manifest.game.n_actions() {
        return Err(RunnerError::Config(format!(
            "shifted range [{}, {}] is not a translation of the baseline [{}, {}]",
            shifted.game.low(),
            shifted.game.high(),
            baseline_manifest.game.low(),
            baseline_manifest.game.high()
        )));
    }

    let shifted_manifest = simulate(shifted, shifted_run_dir, resume)?;

    let mut validity_rows = Vec::new();
    let mut oos_rows = Vec::new();
    for report in &shifted_manifest.cells {
        let shifted_traces = read_traces(&cell_trace_path(shifted_run_dir, &report.cell_id))?;
        let config = shifted_traces
            .first()
            .map(|t| {
                let mut c = t.config.clone();
                c.role = llm_agent::Role::Unspecified;
                c
            })
            .ok_or_else(|| RunnerError::Traces(format!("{}: empty cell", report.cell_id)))?;
        let model_id = config
            .llm_model
            .as_ref()
            .map(|m| m.id.clone())
            .unwrap_or_default();

        let episodes = shifted_traces.len() as u32;
        let valid = shifted_traces.iter().filter(|t| t.valid).count() as u32;
        validity_rows.push(ValidityRow {
            cell_id: report.cell_id.clone(),
            agent_kind: config.agent_kind,
            model_id: model_id.clone(),
            context: config.context,
            moa: config.moa,
            sophistication: sophistication_score(&config),
            episodes,
            valid,
            validity_ratio: valid as f64 / episodes.max(1) as f64,
        });

        // Baseline distribution for the same cell.
        let baseline_path = cell_trace_path(baseline_run_dir, &report.cell_id);
        if !baseline_path.exists() {
            return Err(RunnerError::MissingBaseline(format!(
                "baseline run has no cell {}",
                report.cell_id
            )));
        }
        let baseline_traces = read_traces(&baseline_path)?;
        let mut baseline: Vec<f64> = baseline_traces
            .iter()
            .filter_map(|t| t.guess)
            .map(|g| g as f64)
            .collect();
        baseline.sort_by(|a, b| a.total_cmp(b));

        let mut normalized: Vec<f64> = shifted_traces
            .iter()
            .filter_map(|t| t.guess)
            .map(|g| (g - shift) as f64)
            .collect();
        normalized.sort_by(|a, b| a.total_cmp(b));

        let row = if baseline.len() >= 2 && normalized.len() >= 2 {
            let w = wasserstein_1d(&baseline, &normalized)?;
            let test = choose_test(&baseline, &normalized)?;
            OosRow {
                cell_id: report.cell_id.clone(),
                agent_kind: config.agent_kind,
                model_id,
                context: config.context,
                moa: config.moa,
                n_baseline: baseline.len(),
                n_shifted_valid: normalized.len(),
                wasserstein: Some(w),
                test_kind: Some(test.test_kind),
                statistic: Some(test.statistic),
                p_value: Some(test.p_value),
                star: stars(test.p_value).to_string(),
            }
        } else {
            OosRow {
                cell_id: report.cell_id.clone(),
                agent_kind: config.agent_kind,
                model_id,
                context: config.context,
                moa: config.moa,
                n_baseline: baseline.len(),
                n_shifted_valid: normalized.len(),
                wasserstein: None,
                test_kind: None,
                statistic: None,
                p_value: None,
                star: String::new(),
            }
        };
        oos_rows.push(row);
    }

    std::fs::create_dir_all(metrics_out).map_err(crate::io_err(metrics_out))?;
    write_json(metrics_out, "validity.json", &validity_rows)?;
    write_csv(metrics_out, "validity.csv", &validity_rows)?;
    write_json(metrics_out, "oos_comparison.json", &oos_rows)?;
    write_csv(metrics_out, "oos_comparison.csv", &oos_rows)?;
    Ok(())
}
