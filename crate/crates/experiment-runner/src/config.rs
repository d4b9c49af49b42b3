use crate::{io_err, RunnerError};
use ewa_agent::EwaParams;
use game_core::{parse_rational, GameSpec};
use llm_agent::{
    config_lattice, AgentConfig, AgentKind, ContextKind, GenerationSettings, ModelRef,
    RetryPolicy, ScriptedStub, StubDefault, StubRule, StubScript,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stat_lab::{LeveneCenter, ZeroHandling};
use std::path::Path;

/// On-disk experiment configuration (TOML). See README for the schema.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples_per_cell: u32,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub game: GameSection,
    pub agents: AgentsSection,
    #[serde(default)]
    pub ewa: EwaParams,
    pub backend: BackendSection,
    #[serde(default)]
    pub analysis: AnalysisFlags,
    #[serde(default)]
    pub run: RunSettings,
}

fn default_samples() -> u32 {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    /// Rational multiplier, e.g. "2/3".
    pub p: String,
    pub low: i64,
    pub high: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSection {
    /// Expand the full 25-configuration lattice over `models`.
    #[serde(default)]
    pub lattice: bool,
    #[serde(default)]
    pub models: Vec<ModelRef>,
    /// Explicit cells (used when `lattice` is false).
    #[serde(default)]
    pub cells: Vec<CellSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub agent_kind: AgentKind,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_context")]
    pub context: ContextKind,
    #[serde(default)]
    pub moa: bool,
}

fn default_context() -> ContextKind {
    ContextKind::None
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendChoice,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub generation: GenerationSettings,
    #[serde(default)]
    pub stub: Option<StubSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Stub,
    Http,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubSection {
    #[serde(default)]
    pub rules: Vec<StubRule>,
    pub default: StubDefaultSection,
    #[serde(default)]
    pub belief_text: Option<String>,
}

/// Stub behaviour in the config file; `replay_csv` resolves cohort lists
/// from a guess CSV at load time.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum StubDefaultSection {
    Fixed { text: String },
    Formula { a: i64, b: i64, c: i64 },
    Constant { value: i64 },
    Replay {
        student: Vec<i64>,
        expert: Vec<i64>,
        pooled: Vec<i64>,
    },
    ReplayCsv { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisFlags {
    pub wasserstein: WassersteinVariant,
    pub levene: LeveneCenter,
    pub zero_k: ZeroHandling,
}

impl Default for AnalysisFlags {
    fn default() -> Self {
        Self {
            wasserstein: WassersteinVariant::Raw,
            levene: LeveneCenter::Mean,
            zero_k: ZeroHandling::Cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinVariant {
    #[default]
    Raw,
    Kde,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub parallelism: usize,
    pub retry_attempts: u32,
    pub retry_base_delay_ms: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            parallelism: 8,
            retry_attempts: 3,
            retry_base_delay_ms: 250,
        }
    }
}

/// A fully resolved experiment: validated game, expanded cells, concrete
/// backend. This is what simulate/oos execute.
pub struct ResolvedExperiment {
    pub seed: u64,
    pub samples_per_cell: u32,
    pub output_dir: Option<String>,
    pub game: GameSpec,
    pub cells: Vec<AgentConfig>,
    pub ewa: EwaParams,
    pub backend: ResolvedBackend,
    pub generation: GenerationSettings,
    pub retry: RetryPolicy,
    pub analysis: AnalysisFlags,
    pub run: RunSettings,
    pub config_hash: String,
}

pub enum ResolvedBackend {
    Stub(ScriptedStub),
    Http { endpoint: String, api_key_env: String },
}

impl ResolvedBackend {
    pub fn choice(&self) -> BackendChoice {
        match self {
            ResolvedBackend::Stub(_) => BackendChoice::Stub,
            ResolvedBackend::Http { .. } => BackendChoice::Http,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ResolvedExperiment, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let file: ExperimentFile =
        toml::from_str(&text).map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
    resolve(file, path.parent().unwrap_or_else(|| Path::new(".")))
}

pub fn resolve(file: ExperimentFile, base_dir: &Path) -> Result<ResolvedExperiment, RunnerError> {
    let p = parse_rational(&file.game.p).map_err(RunnerError::Config)?;
    let game = GameSpec::new(p, file.game.low, file.game.high)
        .map_err(|e| RunnerError::Config(e.to_string()))?;
    // Dense per-action vectors (attractions, choice laws) make huge ranges
    // a config mistake rather than a use case.
    if game.n_actions() > 100_000 {
        return Err(RunnerError::Config(format!(
            "action range has {} actions; the experiment pipeline expects small integer ranges",
            game.n_actions()
        )));
    }

    file.ewa
        .validate()
        .map_err(|e| RunnerError::Config(e.to_string()))?;

    let cells = expand_cells(&file.agents)?;
    if cells.is_empty() {
        return Err(RunnerError::Config("no agent cells configured".into()));
    }
    {
        let mut ids: Vec<String> = cells.iter().map(|c| c.cell_id()).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != cells.len() {
            return Err(RunnerError::Config("duplicate cell ids in config".into()));
        }
    }

    let backend = match file.backend.kind {
        BackendChoice::Stub => {
            let section = file.backend.stub.clone().ok_or_else(|| {
                RunnerError::Config("backend.kind = \"stub\" requires a [backend.stub] table".into())
            })?;
            ResolvedBackend::Stub(resolve_stub(section, base_dir, &game)?)
        }
        BackendChoice::Http => {
            let endpoint = file.backend.endpoint.clone().ok_or_else(|| {
                RunnerError::Config("backend.kind = \"http\" requires backend.endpoint".into())
            })?;
            let api_key_env = file
                .backend
                .api_key_env
                .clone()
                .unwrap_or_else(|| "LLM_API_KEY".to_string());
            ResolvedBackend::Http {
                endpoint,
                api_key_env,
            }
        }
    };

    let retry = RetryPolicy {
        attempts: file.run.retry_attempts,
        base_delay_ms: file.run.retry_base_delay_ms,
    };

    let config_hash = hash_config(&file, &cells, &game);
    Ok(ResolvedExperiment {
        seed: file.seed,
        samples_per_cell: file.samples_per_cell,
        output_dir: file.output_dir,
        game,
        cells,
        ewa: file.ewa,
        backend,
        generation: file.backend.generation,
        retry,
        analysis: file.analysis,
        run: file.run,
        config_hash,
    })
}

fn expand_cells(agents: &AgentsSection) -> Result<Vec<AgentConfig>, RunnerError> {
    if agents.lattice {
        if agents.models.len() != 2 {
            return Err(RunnerError::Config(
                "lattice expansion requires exactly 2 models".into(),
            ));
        }
        let models: [ModelRef; 2] = [agents.models[0].clone(), agents.models[1].clone()];
        return Ok(config_lattice(&models));
    }
    let mut cells = Vec::with_capacity(agents.cells.len());
    for spec in &agents.cells {
        let config = match spec.agent_kind {
            AgentKind::Ewa => AgentConfig::ewa(),
            kind => {
                let id = spec.model.clone().ok_or_else(|| {
                    RunnerError::Config("LLM cells need a model id".into())
                })?;
                let ordinal = agents
                    .models
                    .iter()
                    .find(|m| m.id == id)
                    .map(|m| m.ordinal)
                    .unwrap_or(0);
                AgentConfig::llm(kind, ModelRef::new(id, ordinal), spec.context, spec.moa)
            }
        };
        config
            .validate()
            .map_err(|e| RunnerError::Config(e.to_string()))?;
        cells.push(config);
    }
    Ok(cells)
}

fn resolve_stub(
    section: StubSection,
    base_dir: &Path,
    game: &GameSpec,
) -> Result<ScriptedStub, RunnerError> {
    let default = match section.default {
        StubDefaultSection::Fixed { text } => StubDefault::Fixed { text },
        StubDefaultSection::Formula { a, b, c } => StubDefault::Formula { a, b, c },
        StubDefaultSection::Constant { value } => StubDefault::Constant { value },
        StubDefaultSection::Replay {
            student,
            expert,
            pooled,
        } => StubDefault::Replay {
            student,
            expert,
            pooled,
        },
        StubDefaultSection::ReplayCsv { path } => {
            let resolved = base_dir.join(&path);
            let (student, expert) = human_data::load_human_csv(&resolved, game)?;
            let mut pooled = student.guesses.clone();
            pooled.extend_from_slice(&expert.guesses);
            StubDefault::Replay {
                student: student.guesses,
                expert: expert.guesses,
                pooled,
            }
        }
    };
    Ok(ScriptedStub::new(StubScript {
        rules: section.rules,
        default,
        belief_text: section
            .belief_text
            .unwrap_or_else(llm_agent::default_belief_text),
    }))
}

/// Stable hash over the analysis-relevant parts of the config; stored in
/// the manifest and checked on resume.
fn hash_config(file: &ExperimentFile, cells: &[AgentConfig], game: &GameSpec) -> String {
    #[derive(Serialize)]
    struct Canonical<'a> {
        seed: u64,
        samples_per_cell: u32,
        game: &'a GameSpec,
        cells: Vec<String>,
        ewa: &'a EwaParams,
        backend_kind: BackendChoice,
        generation: &'a GenerationSettings,
        analysis: &'a AnalysisFlags,
    }
    let canonical = Canonical {
        seed: file.seed,
        samples_per_cell: file.samples_per_cell,
        game,
        cells: cells.iter().map(|c| c.cell_id()).collect(),
        ewa: &file.ewa,
        backend_kind: file.backend.kind,
        generation: &file.backend.generation,
        analysis: &file.analysis,
    };
    let json = serde_json::to_vec(&canonical).expect("canonical config serializes");
    let mut hasher = Sha256::new();
    hasher.update(&json);
    hex_lower(&hasher.finalize())
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_stub_toml() -> &'static str {
        r#"
seed = 7
samples_per_cell = 4

[game]
p = "2/3"
low = 0
high = 100

[agents]
lattice = true
models = [ { id = "haiku", ordinal = 0 }, { id = "sonnet", ordinal = 1 } ]

[backend]
kind = "stub"
[backend.stub]
[backend.stub.default]
mode = "formula"
a = 7
b = 13
c = 2
"#
    }

    #[test]
    fn lattice_config_expands_to_25_cells() {
        let file: ExperimentFile = toml::from_str(minimal_stub_toml()).unwrap();
        let resolved = resolve(file, Path::new(".")).unwrap();
        assert_eq!(resolved.cells.len(), 25);
        assert_eq!(resolved.cells[0].cell_id(), "ewa");
        assert_eq!(resolved.samples_per_cell, 4);
    }

    #[test]
    fn config_hash_is_stable_and_seed_sensitive() {
        let file: ExperimentFile = toml::from_str(minimal_stub_toml()).unwrap();
        let a = resolve(file.clone(), Path::new(".")).unwrap().config_hash;
        let b = resolve(file, Path::new(".")).unwrap().config_hash;
        assert_eq!(a, b);

        let mut other: ExperimentFile = toml::from_str(minimal_stub_toml()).unwrap();
        other.seed = 8;
        let c = resolve(other, Path::new(".")).unwrap().config_hash;
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = format!("{}\nnonsense = 3\n", minimal_stub_toml());
        assert!(toml::from_str::<ExperimentFile>(&bad).is_err());
    }

    #[test]
    fn explicit_cells_resolve_model_ordinals() {
        let toml_text = r#"
seed = 1

[game]
p = "2/3"
low = 0
high = 100

[agents]
models = [ { id = "haiku", ordinal = 0 }, { id = "sonnet", ordinal = 1 } ]
[[agents.cells]]
agent_kind = "simple"
model = "sonnet"
context = "simple_profile"
moa = true
[[agents.cells]]
agent_kind = "ewa"

[backend]
kind = "stub"
[backend.stub]
[backend.stub.default]
mode = "constant"
value = 42
"#;
        let file: ExperimentFile = toml::from_str(toml_text).unwrap();
        let resolved = resolve(file, Path::new(".")).unwrap();
        assert_eq!(resolved.cells.len(), 2);
        assert_eq!(resolved.cells[0].cell_id(), "s_sonnet_csim_m1");
        assert_eq!(resolved.cells[0].model_ordinal(), Some(1));
        assert_eq!(resolved.cells[1].cell_id(), "ewa");
    }

    #[test]
    fn ewa_section_overrides_are_honored() {
        let toml_text = format!(
            "{}\n[ewa]\nlambda = 3.5\ntau = 1.0\nk_max = 12\nlevel0 = \"midpoint\"\ndenominator_plus_one = true\n",
            minimal_stub_toml()
        );
        let file: ExperimentFile = toml::from_str(&toml_text).unwrap();
        let resolved = resolve(file, Path::new(".")).unwrap();
        assert_eq!(resolved.ewa.lambda, 3.5);
        assert_eq!(resolved.ewa.k_max, 12);
        assert_eq!(resolved.ewa.level0, ewa_agent::Level0::Midpoint);
        assert!(resolved.ewa.denominator_plus_one);

        // Pinned parameters are rejected when overridden.
        let bad = format!("{}\n[ewa]\nkappa = 0.5\n", minimal_stub_toml());
        let file: ExperimentFile = toml::from_str(&bad).unwrap();
        assert!(matches!(resolve(file, Path::new(".")), Err(RunnerError::Config(_))));
    }

    #[test]
    fn shipped_configs_load() {
        let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for name in [
            "stub_matrix.toml",
            "stub_matrix_oos.toml",
            "mimic_fixture.toml",
            "http_smoke.toml",
        ] {
            load_config(&configs.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn http_backend_requires_an_endpoint() {
        let toml_text = r#"
seed = 1
[game]
p = "2/3"
low = 0
high = 100
[agents]
lattice = true
models = [ { id = "a", ordinal = 0 }, { id = "b", ordinal = 1 } ]
[backend]
kind = "http"
"#;
        let file: ExperimentFile = toml::from_str(toml_text).unwrap();
        assert!(matches!(
            resolve(file, Path::new(".")),
            Err(RunnerError::Config(_))
        ));
    }
}
