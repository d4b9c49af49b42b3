use crate::config::{AnalysisFlags, WassersteinVariant};
use crate::rng::{cell_seed, rng_from};
use crate::traces::{cell_trace_path, read_manifest, read_traces, write_atomic, RunManifest};
use crate::RunnerError;
use ewa_agent::{law_mean_sd, one_shot_law, self_play_samples};
use game_core::GameSpec;
use human_data::{load_human_csv, summarize, CohortSample, CohortSummary};
use llm_agent::{AgentConfig, AgentKind, ContextKind, ReasoningTrace, Role};
use serde::{Deserialize, Serialize};
use stat_lab::{
    ame, choose_test, delta_subpop, k_levels, kde, mean, sample_sd, sophistication_score, stars,
    spearman, wasserstein_1d, wasserstein_kde, zero_rate, ols, FitTerm, TestKind,
};
use std::path::Path;

/// A cell with >20% failed or invalid episodes is excluded from the
/// distribution metrics instead of being silently thinned.
pub const FAILURE_BUDGET: f64 = 0.20;

// ---------------------------------------------------------------------------
// Row schemas (JSON is the canonical form; CSVs mirror them).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMetrics {
    pub cell_id: String,
    pub ordinal: u32,
    pub agent_kind: AgentKind,
    pub model_id: Option<String>,
    pub model_ordinal: Option<u8>,
    pub context: ContextKind,
    pub moa: bool,
    pub sophistication: u32,
    pub episodes: u32,
    pub valid: u32,
    pub invalid: u32,
    pub failed: u32,
    pub validity_ratio: f64,
    pub flagged: bool,
    pub mean_guess: Option<f64>,
    pub sd_guess: Option<f64>,
    pub zeros_per_100: f64,
    pub mean_k: Option<f64>,
    pub ame: Option<f64>,
    pub wasserstein: Option<f64>,
    pub wasserstein_kde: Option<f64>,
    pub mean_tokens_in: f64,
    pub mean_tokens_out: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortCellMetrics {
    pub cell_id: String,
    pub cohort: String,
    pub n: u32,
    pub valid: u32,
    pub mean_guess: Option<f64>,
    pub mean_k: Option<f64>,
    pub ame: Option<f64>,
    pub wasserstein: Option<f64>,
    pub zeros_per_100: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaRow {
    pub cell_id: String,
    pub agent_kind: AgentKind,
    pub model_id: String,
    pub context: ContextKind,
    pub moa: bool,
    pub delta: f64,
    /// Significance of the agent's own student-vs-expert guess difference.
    pub test_kind: TestKind,
    #[serde(with = "stat_lab::nullable_float")]
    pub statistic: f64,
    #[serde(with = "stat_lab::nullable_float")]
    pub p_value: f64,
    pub star: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionTable {
    /// "pooled" (24 LLM cells), or "student"/"expert" (16 role cells).
    pub population: String,
    /// "k_level_error", "wasserstein" or "zero_rate_error".
    pub metric: String,
    pub n_cells: usize,
    pub terms: Vec<FitTerm>,
    /// None when the rank correlation is degenerate (a constant metric).
    pub spearman_rho: Option<f64>,
    pub spearman_p: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenRow {
    pub agent_kind: AgentKind,
    pub context: ContextKind,
    pub moa: bool,
    /// Per-model rows plus an "all" aggregate row.
    pub model: String,
    pub episodes: u32,
    pub mean_tokens_in: f64,
    pub mean_tokens_out: f64,
    pub approximate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EwaCalibration {
    pub analytic_mean: f64,
    pub analytic_sd: f64,
    pub analytic_zero_mass: f64,
    pub analytic_mean_k: f64,
    pub sampled_mean: Option<f64>,
    pub sampled_sd: Option<f64>,
    pub sampled_zero_count: u32,
    pub sampled_episodes: u32,
    pub iterated_mean: f64,
    pub iterated_sd: f64,
    pub iterated_zero_rate: f64,
    pub iterated_rounds: u32,
    /// Reference reasoning level for the self-tuning EWA benchmark on
    /// two-player guessing games; informative, not a gate.
    pub reference_mean_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HumanBlock {
    pub student: CohortSummary,
    pub expert: CohortSummary,
    pub pooled: CohortSummary,
    pub pooled_mean_k: f64,
    pub student_mean_k: f64,
    pub expert_mean_k: f64,
    pub zeros_per_100_pooled: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GapReport {
    pub missing_cells: Vec<String>,
    pub flagged_cells: Vec<String>,
    pub empty_cells: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisMeta {
    pub flags: AnalysisFlags,
    pub config_hash: String,
    pub human_csv: String,
    pub game: GameSpec,
}

// ---------------------------------------------------------------------------

struct CellData {
    config: AgentConfig,
    ordinal: u32,
    traces: Vec<ReasoningTrace>,
    /// Valid guesses, sorted (analysis is order-independent by design).
    guesses: Vec<i64>,
    student_guesses: Vec<i64>,
    expert_guesses: Vec<i64>,
}

impl CellData {
    fn from_traces(config: AgentConfig, ordinal: u32, traces: Vec<ReasoningTrace>) -> Self {
        let mut guesses = Vec::new();
        let mut student_guesses = Vec::new();
        let mut expert_guesses = Vec::new();
        for t in &traces {
            if let Some(g) = t.guess {
                guesses.push(g);
                match t.config.role {
                    Role::Student => student_guesses.push(g),
                    Role::Expert => expert_guesses.push(g),
                    Role::Unspecified => {}
                }
            }
        }
        guesses.sort_unstable();
        student_guesses.sort_unstable();
        expert_guesses.sort_unstable();
        Self {
            config,
            ordinal,
            traces,
            guesses,
            student_guesses,
            expert_guesses,
        }
    }

    fn episodes(&self) -> u32 {
        self.traces.len() as u32
    }

    fn valid(&self) -> u32 {
        self.traces.iter().filter(|t| t.valid).count() as u32
    }

    fn failed(&self) -> u32 {
        self.traces.iter().filter(|t| t.failure.is_some()).count() as u32
    }

    fn zeros_per_100(&self) -> f64 {
        if self.traces.is_empty() {
            return 0.0;
        }
        100.0 * self.guesses.iter().filter(|g| **g == 0).count() as f64
            / self.traces.len() as f64
    }

    fn flagged(&self) -> bool {
        let bad = (self.episodes() - self.valid()) as f64;
        self.episodes() == 0 || bad / self.episodes() as f64 > FAILURE_BUDGET
    }
}

fn guesses_f64(guesses: &[i64]) -> Vec<f64> {
    guesses.iter().map(|g| *g as f64).collect()
}

/// Run the full analysis over a finished run directory and write every
/// metrics file into `out_dir`.
pub fn analyze(
    run_dir: &Path,
    human_csv: &Path,
    out_dir: &Path,
    flag_overrides: Option<AnalysisFlags>,
) -> Result<(), RunnerError> {
    let manifest = read_manifest(run_dir)?;
    let flags = flag_overrides.unwrap_or(manifest.analysis);
    let game = manifest.game.clone();
    let a0 = rational_to_f64(game.midpoint());
    let p = rational_to_f64(game.p());

    // Human benchmark.
    let (student, expert) = load_human_csv(human_csv, &game)?;
    let pooled = CohortSample::pooled(&student, &expert);
    let human_ks = k_levels(&pooled.guesses, a0, p, flags.zero_k)?;
    let human_student_ks = k_levels(&student.guesses, a0, p, flags.zero_k)?;
    let human_expert_ks = k_levels(&expert.guesses, a0, p, flags.zero_k)?;
    let human = HumanBlock {
        student: summarize(&student),
        expert: summarize(&expert),
        pooled: summarize(&pooled),
        pooled_mean_k: mean(&human_ks)?,
        student_mean_k: mean(&human_student_ks)?,
        expert_mean_k: mean(&human_expert_ks)?,
        zeros_per_100_pooled: 100.0 * zero_rate(&pooled.guesses)?,
    };

    // Load every cell named by the manifest.
    let mut cells = Vec::new();
    let mut gaps = GapReport::default();
    for report in &manifest.cells {
        let path = cell_trace_path(run_dir, &report.cell_id);
        if !path.exists() {
            gaps.missing_cells.push(report.cell_id.clone());
            continue;
        }
        let traces = read_traces(&path)?;
        let config = traces
            .first()
            .map(|t| t.config.clone())
            .ok_or_else(|| RunnerError::Traces(format!("{}: empty trace file", report.cell_id)))?;
        let mut cell_config = config;
        cell_config.role = Role::Unspecified;
        cells.push(CellData::from_traces(cell_config, report.ordinal, traces));
    }
    cells.sort_by_key(|c| c.ordinal);

    // Per-cell metrics.
    let mut cell_rows = Vec::new();
    let mut cohort_rows = Vec::new();
    let mut delta_rows = Vec::new();
    for cell in &cells {
        let usable = !cell.flagged() && !cell.guesses.is_empty();
        if cell.guesses.is_empty() {
            gaps.empty_cells.push(cell.config.cell_id());
        } else if cell.flagged() {
            gaps.flagged_cells.push(cell.config.cell_id());
        }

        let xs = guesses_f64(&cell.guesses);
        let ks = k_levels(&cell.guesses, a0, p, flags.zero_k)?;
        let (mean_guess, sd_guess, mean_k, cell_ame, w_raw, w_kde) = if usable {
            let w_raw = wasserstein_1d(&guesses_f64(&pooled.guesses), &xs)?;
            let w_kde_val = match flags.wasserstein {
                WassersteinVariant::Kde => Some(wasserstein_kde(
                    &guesses_f64(&pooled.guesses),
                    &xs,
                    game.low() as f64,
                    game.high() as f64,
                    201,
                    None,
                )?),
                WassersteinVariant::Raw => None,
            };
            (
                mean(&xs).ok(),
                sample_sd(&xs).ok(),
                mean(&ks).ok(),
                Some(ame(&human_ks, &ks)?),
                Some(w_raw),
                w_kde_val,
            )
        } else {
            (None, None, None, None, None, None)
        };

        let total_tokens_in: u64 = cell.traces.iter().map(|t| t.tokens_in).sum();
        let total_tokens_out: u64 = cell.traces.iter().map(|t| t.tokens_out).sum();
        cell_rows.push(CellMetrics {
            cell_id: cell.config.cell_id(),
            ordinal: cell.ordinal,
            agent_kind: cell.config.agent_kind,
            model_id: cell.config.llm_model.as_ref().map(|m| m.id.clone()),
            model_ordinal: cell.config.model_ordinal(),
            context: cell.config.context,
            moa: cell.config.moa,
            sophistication: sophistication_score(&cell.config),
            episodes: cell.episodes(),
            valid: cell.valid(),
            invalid: cell.episodes() - cell.valid() - cell.failed(),
            failed: cell.failed(),
            validity_ratio: cell.valid() as f64 / cell.episodes().max(1) as f64,
            flagged: cell.flagged(),
            mean_guess,
            sd_guess,
            zeros_per_100: cell.zeros_per_100(),
            mean_k,
            ame: cell_ame,
            wasserstein: w_raw,
            wasserstein_kde: w_kde,
            mean_tokens_in: total_tokens_in as f64 / cell.episodes().max(1) as f64,
            mean_tokens_out: total_tokens_out as f64 / cell.episodes().max(1) as f64,
        });

        // Cohort-level metrics and the delta for role-supporting cells.
        if cell.config.supports_roles() && usable {
            let model_id = cell
                .config
                .llm_model
                .as_ref()
                .map(|m| m.id.clone())
                .unwrap_or_default();
            for (cohort, guesses, human_cohort, human_cohort_ks) in [
                ("student", &cell.student_guesses, &student, &human_student_ks),
                ("expert", &cell.expert_guesses, &expert, &human_expert_ks),
            ] {
                if guesses.is_empty() {
                    continue;
                }
                let ks = k_levels(guesses, a0, p, flags.zero_k)?;
                let xs = guesses_f64(guesses);
                cohort_rows.push(CohortCellMetrics {
                    cell_id: cell.config.cell_id(),
                    cohort: cohort.to_string(),
                    n: guesses.len() as u32,
                    valid: guesses.len() as u32,
                    mean_guess: mean(&xs).ok(),
                    mean_k: mean(&ks).ok(),
                    ame: Some(ame(human_cohort_ks, &ks)?),
                    wasserstein: Some(wasserstein_1d(&guesses_f64(&human_cohort.guesses), &xs)?),
                    zeros_per_100: 100.0 * zero_rate(guesses)?,
                });
            }
            if cell.student_guesses.len() >= 2 && cell.expert_guesses.len() >= 2 {
                let student_ks = k_levels(&cell.student_guesses, a0, p, flags.zero_k)?;
                let expert_ks = k_levels(&cell.expert_guesses, a0, p, flags.zero_k)?;
                let delta = delta_subpop(
                    &human_student_ks,
                    &student_ks,
                    &human_expert_ks,
                    &expert_ks,
                )?;
                let test = choose_test(
                    &guesses_f64(&cell.student_guesses),
                    &guesses_f64(&cell.expert_guesses),
                )?;
                delta_rows.push(DeltaRow {
                    cell_id: cell.config.cell_id(),
                    agent_kind: cell.config.agent_kind,
                    model_id,
                    context: cell.config.context,
                    moa: cell.config.moa,
                    delta,
                    test_kind: test.test_kind,
                    statistic: test.statistic,
                    p_value: test.p_value,
                    star: stars(test.p_value).to_string(),
                });
            }
        }
    }

    // Sophistication regressions + rank correlations.
    let regressions = run_regressions(&cells, &cell_rows, &cohort_rows, &human)?;

    // Token cost aggregation over LLM cells.
    let tokens = token_rows(&cells);

    // KDE curves for the figures.
    let curves = kde_curves(&game, &student, &expert, &pooled, &cells)?;

    // EWA calibration block.
    let ewa_calibration = ewa_block(&manifest, &cells, a0, p)?;

    std::fs::create_dir_all(out_dir).map_err(crate::io_err(out_dir))?;
    write_json(out_dir, "cells.json", &cell_rows)?;
    write_csv(out_dir, "cells.csv", &cell_rows)?;
    write_json(out_dir, "cohort_cells.json", &cohort_rows)?;
    write_csv(out_dir, "cohort_cells.csv", &cohort_rows)?;
    write_json(out_dir, "delta.json", &delta_rows)?;
    write_csv(out_dir, "delta.csv", &delta_rows)?;
    write_json(out_dir, "regressions.json", &regressions)?;
    write_json(out_dir, "tokens.json", &tokens)?;
    write_csv(out_dir, "tokens.csv", &tokens)?;
    write_json(out_dir, "kde_curves.json", &curves)?;
    write_json(out_dir, "ewa_calibration.json", &ewa_calibration)?;
    write_json(out_dir, "human.json", &human)?;
    write_json(out_dir, "gaps.json", &gaps)?;
    write_json(
        out_dir,
        "meta.json",
        &AnalysisMeta {
            flags,
            config_hash: manifest.config_hash.clone(),
            human_csv: human_csv.display().to_string(),
            game: game.clone(),
        },
    )?;
    Ok(())
}

pub fn rational_to_f64(r: game_core::Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn run_regressions(
    cells: &[CellData],
    cell_rows: &[CellMetrics],
    cohort_rows: &[CohortCellMetrics],
    human: &HumanBlock,
) -> Result<Vec<RegressionTable>, RunnerError> {
    let mut tables = Vec::new();
    let factor_names = ["agent_type", "llm_model", "context", "instruction"];

    // Pooled population: all usable LLM cells.
    let llm_rows: Vec<&CellMetrics> = cell_rows
        .iter()
        .filter(|r| r.agent_kind != AgentKind::Ewa && !r.flagged && r.ame.is_some())
        .collect();
    if llm_rows.len() >= 8 {
        let factors: Vec<Vec<f64>> = vec![
            llm_rows.iter().map(|r| r.agent_kind.ordinal() as f64).collect(),
            llm_rows.iter().map(|r| r.model_ordinal.unwrap_or(0) as f64).collect(),
            llm_rows.iter().map(|r| r.context.ordinal() as f64).collect(),
            llm_rows.iter().map(|r| f64::from(r.moa)).collect(),
        ];
        let scores: Vec<f64> = llm_rows.iter().map(|r| r.sophistication as f64).collect();
        for (metric, values) in [
            (
                "k_level_error",
                llm_rows.iter().map(|r| r.ame.unwrap()).collect::<Vec<f64>>(),
            ),
            (
                "wasserstein",
                llm_rows.iter().map(|r| r.wasserstein.unwrap()).collect(),
            ),
            (
                "zero_rate_error",
                llm_rows
                    .iter()
                    .map(|r| (r.zeros_per_100 - human.zeros_per_100_pooled).abs())
                    .collect(),
            ),
        ] {
            let fit = ols(&factor_names, &factors, &values)?;
            let rank = spearman(&scores, &values)?;
            tables.push(RegressionTable {
                population: "pooled".to_string(),
                metric: metric.to_string(),
                n_cells: llm_rows.len(),
                terms: fit.terms,
                spearman_rho: (!rank.degenerate).then_some(rank.statistic),
                spearman_p: (!rank.degenerate).then_some(rank.p_value),
            });
        }
    }

    // Cohort populations: role-supporting cells only.
    for cohort in ["student", "expert"] {
        let rows: Vec<&CohortCellMetrics> = cohort_rows
            .iter()
            .filter(|r| r.cohort == cohort && r.ame.is_some())
            .collect();
        if rows.len() < 8 {
            continue;
        }
        let lookup = |cell_id: &str| -> Option<&CellData> {
            cells.iter().find(|c| c.config.cell_id() == cell_id)
        };
        let mut factors: Vec<Vec<f64>> = vec![Vec::new(); 4];
        let mut scores = Vec::new();
        for row in &rows {
            let cell = lookup(&row.cell_id)
                .ok_or_else(|| RunnerError::Traces(format!("unknown cell {}", row.cell_id)))?;
            factors[0].push(cell.config.agent_kind.ordinal() as f64);
            factors[1].push(cell.config.model_ordinal().unwrap_or(0) as f64);
            factors[2].push(cell.config.context.ordinal() as f64);
            factors[3].push(f64::from(cell.config.moa));
            scores.push(sophistication_score(&cell.config) as f64);
        }
        let human_cohort_zeros = match cohort {
            "student" => 100.0 * human.student.zero_rate,
            _ => 100.0 * human.expert.zero_rate,
        };
        for (metric, values) in [
            (
                "k_level_error",
                rows.iter().map(|r| r.ame.unwrap()).collect::<Vec<f64>>(),
            ),
            (
                "wasserstein",
                rows.iter().map(|r| r.wasserstein.unwrap()).collect(),
            ),
            (
                "zero_rate_error",
                rows.iter()
                    .map(|r| (r.zeros_per_100 - human_cohort_zeros).abs())
                    .collect(),
            ),
        ] {
            let fit = ols(&factor_names, &factors, &values)?;
            let rank = spearman(&scores, &values)?;
            tables.push(RegressionTable {
                population: cohort.to_string(),
                metric: metric.to_string(),
                n_cells: rows.len(),
                terms: fit.terms,
                spearman_rho: (!rank.degenerate).then_some(rank.statistic),
                spearman_p: (!rank.degenerate).then_some(rank.p_value),
            });
        }
    }
    Ok(tables)
}

fn token_rows(cells: &[CellData]) -> Vec<TokenRow> {
    let mut rows = Vec::new();
    let mut combos: Vec<(AgentKind, ContextKind, bool)> = Vec::new();
    for cell in cells {
        if cell.config.agent_kind == AgentKind::Ewa {
            continue;
        }
        let key = (cell.config.agent_kind, cell.config.context, cell.config.moa);
        if !combos.contains(&key) {
            combos.push(key);
        }
    }
    for (kind, context, moa) in combos {
        let members: Vec<&CellData> = cells
            .iter()
            .filter(|c| {
                c.config.agent_kind == kind && c.config.context == context && c.config.moa == moa
            })
            .collect();
        let mut model_ids: Vec<String> = members
            .iter()
            .filter_map(|c| c.config.llm_model.as_ref().map(|m| m.id.clone()))
            .collect();
        model_ids.sort();
        model_ids.dedup();
        let mut groups: Vec<(String, Vec<&CellData>)> = model_ids
            .into_iter()
            .map(|id| {
                let group: Vec<&CellData> = members
                    .iter()
                    .filter(|c| {
                        c.config.llm_model.as_ref().map(|m| m.id.as_str()) == Some(id.as_str())
                    })
                    .copied()
                    .collect();
                (id, group)
            })
            .collect();
        groups.push(("all".to_string(), members));
        for (model, group) in groups {
            let episodes: u32 = group.iter().map(|c| c.episodes()).sum();
            if episodes == 0 {
                continue;
            }
            let tokens_in: u64 = group
                .iter()
                .flat_map(|c| c.traces.iter())
                .map(|t| t.tokens_in)
                .sum();
            let tokens_out: u64 = group
                .iter()
                .flat_map(|c| c.traces.iter())
                .map(|t| t.tokens_out)
                .sum();
            let approximate = group
                .iter()
                .flat_map(|c| c.traces.iter())
                .any(|t| t.tokens_approximate);
            rows.push(TokenRow {
                agent_kind: kind,
                context,
                moa,
                model,
                episodes,
                mean_tokens_in: tokens_in as f64 / episodes as f64,
                mean_tokens_out: tokens_out as f64 / episodes as f64,
                approximate,
            });
        }
    }
    rows
}

fn kde_curves(
    game: &GameSpec,
    student: &CohortSample,
    expert: &CohortSample,
    pooled: &CohortSample,
    cells: &[CellData],
) -> Result<Vec<Curve>, RunnerError> {
    let lo = game.low() as f64;
    let hi = game.high() as f64;
    let points = 201;
    let mut curves = Vec::new();
    for (label, sample) in [
        ("human_pooled", pooled),
        ("human_student", student),
        ("human_expert", expert),
    ] {
        let xs = sample.as_f64();
        if xs.len() >= 2 {
            let curve = kde(&xs, lo, hi, points, None)?;
            curves.push(Curve {
                label: label.to_string(),
                xs: curve.xs,
                ys: curve.ys,
            });
        }
    }
    for cell in cells {
        if cell.guesses.len() < 2 || cell.flagged() {
            continue;
        }
        let curve = kde(&guesses_f64(&cell.guesses), lo, hi, points, None)?;
        curves.push(Curve {
            label: cell.config.cell_id(),
            xs: curve.xs,
            ys: curve.ys,
        });
        for (cohort, guesses) in [
            ("student", &cell.student_guesses),
            ("expert", &cell.expert_guesses),
        ] {
            if guesses.len() >= 2 {
                let curve = kde(&guesses_f64(guesses), lo, hi, points, None)?;
                curves.push(Curve {
                    label: format!("{}@{}", cell.config.cell_id(), cohort),
                    xs: curve.xs,
                    ys: curve.ys,
                });
            }
        }
    }
    Ok(curves)
}

fn ewa_block(
    manifest: &RunManifest,
    cells: &[CellData],
    a0: f64,
    p: f64,
) -> Result<EwaCalibration, RunnerError> {
    let game = &manifest.game;
    let law = one_shot_law(game, &manifest.ewa);
    let (analytic_mean, analytic_sd) = law_mean_sd(&law, game);
    let analytic_zero_mass = if game.contains(0) {
        law[game.index_of(0)]
    } else {
        0.0
    };
    let analytic_mean_k = stat_lab::to_k_level(analytic_mean, a0, p)
        .map(|k| k.0)
        .unwrap_or(f64::NAN);

    let ewa_cell = cells.iter().find(|c| c.config.agent_kind == AgentKind::Ewa);
    let (sampled_mean, sampled_sd, sampled_zero_count, sampled_episodes) = match ewa_cell {
        Some(cell) => {
            let xs = guesses_f64(&cell.guesses);
            (
                mean(&xs).ok(),
                sample_sd(&xs).ok(),
                cell.guesses.iter().filter(|g| **g == 0).count() as u32,
                cell.episodes(),
            )
        }
        None => (None, None, 0, 0),
    };

    let rounds = 10;
    let mut rng = rng_from(cell_seed(manifest.seed, "ewa", "calibration"));
    let iterated = self_play_samples(game, &manifest.ewa, rounds, 250, &mut rng)?;
    let iterated_xs: Vec<f64> = iterated.iter().map(|g| *g as f64).collect();

    Ok(EwaCalibration {
        analytic_mean,
        analytic_sd,
        analytic_zero_mass,
        analytic_mean_k,
        sampled_mean,
        sampled_sd,
        sampled_zero_count,
        sampled_episodes,
        iterated_mean: mean(&iterated_xs)?,
        iterated_sd: sample_sd(&iterated_xs)?,
        iterated_zero_rate: zero_rate(&iterated)?,
        iterated_rounds: rounds,
        reference_mean_k: 3.0,
    })
}

// ---------------------------------------------------------------------------
// Serialization helpers.
// ---------------------------------------------------------------------------

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), RunnerError> {
    let json = serde_json::to_string_pretty(value)?;
    write_atomic(&dir.join(name), json.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T, RunnerError> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(crate::io_err(&path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Flat CSV mirror of a JSON row array (headers from the first row's keys,
/// depth-one flattening; lists and objects are skipped).
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<(), RunnerError> {
    let mut out = String::new();
    let values: Vec<serde_json::Value> = rows
        .iter()
        .map(serde_json::to_value)
        .collect::<Result<_, _>>()?;
    if let Some(serde_json::Value::Object(first)) = values.first() {
        let headers: Vec<&String> = first
            .iter()
            .filter(|(_, v)| !v.is_array() && !v.is_object())
            .map(|(k, _)| k)
            .collect();
        out.push_str(
            &headers
                .iter()
                .map(|h| h.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for value in &values {
            let obj = value.as_object().expect("rows are structs");
            let fields: Vec<String> = headers
                .iter()
                .map(|h| match obj.get(*h) {
                    Some(serde_json::Value::String(s)) => s.clone(),
                    Some(serde_json::Value::Null) | None => String::new(),
                    Some(v) => v.to_string(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    write_atomic(&dir.join(name), out.as_bytes())
}
