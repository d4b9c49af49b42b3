use crate::config::{BackendChoice, ResolvedBackend, ResolvedExperiment};
use crate::rng::{cell_seed, episode_seed, rng_from};
use crate::traces::{
    cell_trace_path, manifest_path, read_traces_lenient, write_manifest, write_traces, BackendIdentity,
    CellReport, MatchRow, RunManifest, TemplateVersions, MANIFEST_SCHEMA_VERSION,
};
use crate::{io_err, RunnerError};
use game_core::{describe_game, score_pair, GameDescription, GameSpec};
use llm_agent::{
    reasoner_decide, simple_decide, AgentConfig, AgentKind, EpisodeSetup, GenerationSettings,
    HttpChatBackend, LlmBackend, ReasoningTrace, Role, TRACE_SCHEMA_VERSION,
};
use rand::Rng;
use rayon::prelude::*;
use std::path::Path;

/// Run every configured cell for `samples_per_cell` episodes, write one
/// JSONL trace file per cell, score the post-hoc pairings, and finish by
/// writing the manifest (the completion marker).
///
/// With `resume`, episodes already present on disk are kept and only the
/// missing ones are computed; the final bytes are independent of where a
/// previous run was interrupted.
pub fn simulate(
    experiment: &ResolvedExperiment,
    run_dir: &Path,
    resume: bool,
) -> Result<RunManifest, RunnerError> {
    let started_at = chrono::Utc::now().to_rfc3339();

    if manifest_path(run_dir).exists() {
        if !resume {
            return Err(RunnerError::AlreadyComplete(run_dir.display().to_string()));
        }
        let existing = crate::traces::read_manifest(run_dir)?;
        if existing.config_hash == experiment.config_hash {
            log::info!("run already complete at {}", run_dir.display());
            return Ok(existing);
        }
        return Err(RunnerError::Config(format!(
            "existing manifest in {} was produced by a different config",
            run_dir.display()
        )));
    }
    if !resume && crate::traces::traces_dir(run_dir).exists() {
        return Err(RunnerError::Config(format!(
            "{} already contains trace files; pass --resume to complete them",
            run_dir.display()
        )));
    }

    std::fs::create_dir_all(crate::traces::traces_dir(run_dir))
        .map_err(io_err(run_dir))?;

    let backend: Box<dyn LlmBackend> = match &experiment.backend {
        ResolvedBackend::Stub(stub) => Box::new(stub.clone()),
        ResolvedBackend::Http {
            endpoint,
            api_key_env,
        } => Box::new(
            HttpChatBackend::from_env(endpoint.clone(), api_key_env)
                .map_err(|e| RunnerError::Config(e.to_string()))?,
        ),
    };
    let description = describe_game(&experiment.game);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(experiment.run.parallelism.max(1))
        .build()
        .map_err(|e| RunnerError::Config(e.to_string()))?;

    let cell_outputs: Vec<Result<(CellReport, Vec<MatchRow>), RunnerError>> = pool.install(|| {
        experiment
            .cells
            .par_iter()
            .enumerate()
            .map(|(ordinal, cell)| {
                run_cell(
                    experiment,
                    run_dir,
                    cell,
                    ordinal as u32,
                    backend.as_ref(),
                    &description,
                    resume,
                )
            })
            .collect()
    });

    let mut cells = Vec::with_capacity(cell_outputs.len());
    let mut matches = Vec::new();
    for output in cell_outputs {
        let (report, cell_matches) = output?;
        cells.push(report);
        matches.extend(cell_matches);
    }
    cells.sort_by_key(|c| c.ordinal);

    let mut match_bytes = Vec::new();
    for row in &matches {
        serde_json::to_writer(&mut match_bytes, row)?;
        match_bytes.push(b'\n');
    }
    crate::traces::write_atomic(&run_dir.join("matches.jsonl"), &match_bytes)?;

    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        config_hash: experiment.config_hash.clone(),
        seed: experiment.seed,
        samples_per_cell: experiment.samples_per_cell,
        game: experiment.game.clone(),
        template_versions: TemplateVersions {
            description: game_core::DESCRIPTION_TEMPLATE_VERSION.to_string(),
            prompt: llm_agent::PROMPT_TEMPLATE_VERSION.to_string(),
        },
        backend: BackendIdentity {
            kind: experiment.backend.choice(),
            models: experiment
                .cells
                .iter()
                .filter_map(|c| c.llm_model.clone())
                .fold(Vec::new(), |mut acc, m| {
                    if !acc.contains(&m) {
                        acc.push(m);
                    }
                    acc
                }),
            endpoint: match &experiment.backend {
                ResolvedBackend::Http { endpoint, .. } => Some(endpoint.clone()),
                ResolvedBackend::Stub(_) => None,
            },
        },
        ewa: experiment.ewa.clone(),
        analysis: experiment.analysis,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        cells,
    };
    write_manifest(run_dir, &manifest)?;
    Ok(manifest)
}

fn run_cell(
    experiment: &ResolvedExperiment,
    run_dir: &Path,
    cell: &AgentConfig,
    ordinal: u32,
    backend: &dyn LlmBackend,
    description: &GameDescription,
    resume: bool,
) -> Result<(CellReport, Vec<MatchRow>), RunnerError> {
    let cell_id = cell.cell_id();
    let path = cell_trace_path(run_dir, &cell_id);
    let existing = if resume {
        read_traces_lenient(&path)
    } else {
        Default::default()
    };

    let mut traces = Vec::with_capacity(experiment.samples_per_cell as usize);
    for episode in 0..experiment.samples_per_cell {
        let seed = episode_seed(experiment.seed, &cell_id, episode);
        // Reuse an episode only if it provably belongs to this run: same
        // cell and the seed this config derives. Stale files from another
        // experiment get recomputed instead of silently adopted.
        match existing.get(&episode).filter(|t| t.seed == seed && t.cell_id == cell_id) {
            Some(trace) => traces.push(trace.clone()),
            None => {
                traces.push(run_episode(experiment, cell, ordinal, episode, backend, description))
            }
        }
    }
    write_traces(&path, &traces)?;

    let matches = score_pairings(&experiment.game, experiment.seed, &cell_id, &traces);
    let report = summarize_cell(&cell_id, ordinal, cell, &traces, &matches, experiment);
    Ok((report, matches))
}

/// Role assignment inside profile-carrying cells alternates by episode
/// parity: even episodes play the student, odd episodes the expert.
pub fn episode_role(cell: &AgentConfig, episode: u32) -> Role {
    if cell.supports_roles() {
        if episode.is_multiple_of(2) {
            Role::Student
        } else {
            Role::Expert
        }
    } else {
        Role::Unspecified
    }
}

fn run_episode(
    experiment: &ResolvedExperiment,
    cell: &AgentConfig,
    ordinal: u32,
    episode: u32,
    backend: &dyn LlmBackend,
    description: &GameDescription,
) -> ReasoningTrace {
    let cell_id = cell.cell_id();
    let seed = episode_seed(experiment.seed, &cell_id, episode);

    match cell.agent_kind {
        AgentKind::Ewa => {
            let mut rng = rng_from(seed);
            let guess = ewa_agent::i_ewa(&experiment.game, &experiment.ewa, &mut rng);
            ewa_trace(cell, &cell_id, episode, seed, guess)
        }
        kind => {
            let config = cell
                .with_role(episode_role(cell, episode))
                .expect("lattice cells accept episode roles");
            let setup = EpisodeSetup {
                backend,
                config: &config,
                description,
                settings: &experiment.generation,
                retry: &experiment.retry,
                cell_id: cell_id.clone(),
                cell_ordinal: ordinal,
                episode,
                seed,
            };
            match kind {
                AgentKind::Simple => simple_decide(&setup),
                AgentKind::Reasoner => reasoner_decide(&setup),
                AgentKind::Ewa => unreachable!(),
            }
        }
    }
}

/// EWA episodes carry the same trace schema with no prompts or responses.
fn ewa_trace(
    cell: &AgentConfig,
    cell_id: &str,
    episode: u32,
    seed: u64,
    guess: i64,
) -> ReasoningTrace {
    ReasoningTrace {
        schema_version: TRACE_SCHEMA_VERSION,
        cell_id: cell_id.to_string(),
        episode,
        config: cell.clone(),
        prompts: Vec::new(),
        responses: Vec::new(),
        belief: None,
        guess: Some(guess),
        valid: true,
        invalid_kind: None,
        failure: None,
        tokens_in: 0,
        tokens_out: 0,
        tokens_approximate: false,
        template_version: "none".to_string(),
        seed,
        generation: GenerationSettings::default(),
        http_exchanges: None,
    }
}

/// Post-hoc umpire scoring: a seeded fixed-point-free cyclic permutation
/// (Sattolo) pairs each episode with another of the same cell; pairs with
/// any unusable guess stay recorded as incomplete.
fn score_pairings(
    game: &GameSpec,
    experiment_seed: u64,
    cell_id: &str,
    traces: &[ReasoningTrace],
) -> Vec<MatchRow> {
    let n = traces.len();
    if n < 2 {
        return Vec::new();
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(cell_seed(experiment_seed, cell_id, "pairing"));
    // Sattolo's algorithm: a uniform single cycle, hence a derangement.
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        perm.swap(i, j);
    }

    let mut rows = Vec::with_capacity(n);
    for (i, &j) in perm.iter().enumerate() {
        let gi = traces[i].guess.filter(|g| game.contains(*g));
        let gj = traces[j].guess.filter(|g| game.contains(*g));
        let row = match (gi, gj) {
            (Some(a), Some(b)) => {
                let result = score_pair(a, b, game).expect("guesses validated in range");
                MatchRow {
                    cell_id: cell_id.to_string(),
                    episode_i: traces[i].episode,
                    episode_j: traces[j].episode,
                    guess_i: Some(a),
                    guess_j: Some(b),
                    utility_i: Some(result.utility_i.value()),
                    utility_j: Some(result.utility_j.value()),
                    complete: true,
                }
            }
            _ => MatchRow {
                cell_id: cell_id.to_string(),
                episode_i: traces[i].episode,
                episode_j: traces[j].episode,
                guess_i: gi,
                guess_j: gj,
                utility_i: None,
                utility_j: None,
                complete: false,
            },
        };
        rows.push(row);
    }
    rows
}

fn summarize_cell(
    cell_id: &str,
    ordinal: u32,
    cell: &AgentConfig,
    traces: &[ReasoningTrace],
    matches: &[MatchRow],
    experiment: &ResolvedExperiment,
) -> CellReport {
    let valid = traces.iter().filter(|t| t.valid).count() as u32;
    let failed = traces.iter().filter(|t| t.failure.is_some()).count() as u32;
    let invalid = traces.len() as u32 - valid - failed;
    let llm_calls: u64 = if cell.agent_kind == AgentKind::Ewa {
        0
    } else {
        traces.iter().map(|t| t.responses.len() as u64).sum()
    };
    let network_calls = match experiment.backend.choice() {
        BackendChoice::Stub => 0,
        BackendChoice::Http => llm_calls,
    };
    CellReport {
        cell_id: cell_id.to_string(),
        ordinal,
        episodes: traces.len() as u32,
        valid,
        invalid,
        failed,
        llm_calls,
        network_calls,
        tokens_in: traces.iter().map(|t| t.tokens_in).sum(),
        tokens_out: traces.iter().map(|t| t.tokens_out).sum(),
        matches_complete: matches.iter().filter(|m| m.complete).count() as u32,
        matches_incomplete: matches.iter().filter(|m| !m.complete).count() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sattolo_pairing_is_a_derangement() {
        let game = GameSpec::two_thirds_standard();
        let traces: Vec<ReasoningTrace> = (0..50)
            .map(|i| ewa_trace(&AgentConfig::ewa(), "ewa", i, 0, 10))
            .collect();
        let rows = score_pairings(&game, 99, "ewa", &traces);
        assert_eq!(rows.len(), 50);
        for row in &rows {
            assert_ne!(row.episode_i, row.episode_j, "no self-pairing");
            assert!(row.complete);
        }
    }
}
