use serde::{Deserialize, Serialize};
use thiserror::Error;

/// EWA benchmark + {Simple, Reasoner} x {2 models} x {3 contexts} x {2 instructions}.
pub const LATTICE_SIZE: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("context kind {0:?} requires a student or expert role")]
    MissingRole(ContextKind),
    #[error("context 'none' cannot carry a role")]
    UnexpectedRole,
    #[error("EWA agents take no model, context or instruction extras")]
    EwaExtras,
    #[error("LLM agents require a model reference")]
    MissingModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Ewa,
    Simple,
    Reasoner,
}

impl AgentKind {
    /// Ordinal used by the sophistication analyses: EWA=0, Simple=1, Reasoner=2.
    pub fn ordinal(self) -> u8 {
        match self {
            AgentKind::Ewa => 0,
            AgentKind::Simple => 1,
            AgentKind::Reasoner => 2,
        }
    }

    fn code(self) -> &'static str {
        match self {
            AgentKind::Ewa => "ewa",
            AgentKind::Simple => "s",
            AgentKind::Reasoner => "r",
        }
    }
}

/// Context richness axis: nothing, a one-line role profile, or a biography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    None,
    SimpleProfile,
    Biography,
}

impl ContextKind {
    pub fn ordinal(self) -> u8 {
        match self {
            ContextKind::None => 0,
            ContextKind::SimpleProfile => 1,
            ContextKind::Biography => 2,
        }
    }

    fn code(self) -> &'static str {
        match self {
            ContextKind::None => "cnone",
            ContextKind::SimpleProfile => "csim",
            ContextKind::Biography => "cbio",
        }
    }
}

/// Cohort role a contextual agent plays. `Unspecified` is valid only for
/// the no-context configuration, or at the cell level before the runner
/// assigns a concrete role to each episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Unspecified,
    Student,
    Expert,
}

/// Backend model reference plus its ordinal position on the
/// capability/sophistication axis (compact model = 0, flagship = 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelRef {
    pub id: String,
    pub ordinal: u8,
}

impl ModelRef {
    pub fn new(id: impl Into<String>, ordinal: u8) -> Self {
        Self {
            id: id.into(),
            ordinal,
        }
    }

    fn code(&self) -> String {
        self.id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect()
    }
}

/// One point of the configuration lattice plus the episode role.
///
/// At the cell level (what the 25-configuration lattice enumerates) the
/// role is `Unspecified`; the runner resolves a concrete role per episode
/// for the profile-carrying contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub agent_kind: AgentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm_model: Option<ModelRef>,
    pub context: ContextKind,
    #[serde(default)]
    pub role: Role,
    pub moa: bool,
}

impl AgentConfig {
    pub fn ewa() -> Self {
        Self {
            agent_kind: AgentKind::Ewa,
            llm_model: None,
            context: ContextKind::None,
            role: Role::Unspecified,
            moa: false,
        }
    }

    pub fn llm(kind: AgentKind, model: ModelRef, context: ContextKind, moa: bool) -> Self {
        Self {
            agent_kind: kind,
            llm_model: Some(model),
            context,
            role: Role::Unspecified,
            moa,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.agent_kind {
            AgentKind::Ewa => {
                if self.llm_model.is_some()
                    || self.context != ContextKind::None
                    || self.moa
                    || self.role != Role::Unspecified
                {
                    return Err(ConfigError::EwaExtras);
                }
            }
            AgentKind::Simple | AgentKind::Reasoner => {
                if self.llm_model.is_none() {
                    return Err(ConfigError::MissingModel);
                }
                if self.context == ContextKind::None && self.role != Role::Unspecified {
                    return Err(ConfigError::UnexpectedRole);
                }
            }
        }
        Ok(())
    }

    /// Copy of this config with the episode role resolved.
    pub fn with_role(&self, role: Role) -> Result<Self, ConfigError> {
        if self.context == ContextKind::None && role != Role::Unspecified {
            return Err(ConfigError::UnexpectedRole);
        }
        let mut resolved = self.clone();
        resolved.role = role;
        Ok(resolved)
    }

    /// Whether this configuration distinguishes student/expert cohorts.
    pub fn supports_roles(&self) -> bool {
        matches!(self.context, ContextKind::SimpleProfile | ContextKind::Biography)
    }

    /// Stable role-free identifier of the lattice cell, e.g.
    /// `s_haiku_csim_m1` or `ewa`.
    pub fn cell_id(&self) -> String {
        match (&self.agent_kind, &self.llm_model) {
            (AgentKind::Ewa, _) => "ewa".to_string(),
            (kind, Some(model)) => format!(
                "{}_{}_{}_m{}",
                kind.code(),
                model.code(),
                self.context.code(),
                u8::from(self.moa)
            ),
            (kind, None) => format!("{}_nomodel_{}_m{}", kind.code(), self.context.code(), u8::from(self.moa)),
        }
    }

    /// Identifier including the resolved role.
    pub fn config_id(&self) -> String {
        match self.role {
            Role::Unspecified => self.cell_id(),
            Role::Student => format!("{}@student", self.cell_id()),
            Role::Expert => format!("{}@expert", self.cell_id()),
        }
    }

    pub fn instruction_ordinal(&self) -> u8 {
        u8::from(self.moa)
    }

    pub fn model_ordinal(&self) -> Option<u8> {
        self.llm_model.as_ref().map(|m| m.ordinal)
    }
}

/// Enumerate the full experiment lattice: the EWA benchmark plus every
/// {Simple, Reasoner} x model x context x instruction combination, in a
/// fixed deterministic order.
pub fn config_lattice(models: &[ModelRef; 2]) -> Vec<AgentConfig> {
    let mut configs = vec![AgentConfig::ewa()];
    for kind in [AgentKind::Simple, AgentKind::Reasoner] {
        for model in models {
            for context in [ContextKind::None, ContextKind::SimpleProfile, ContextKind::Biography] {
                for moa in [false, true] {
                    configs.push(AgentConfig::llm(kind, model.clone(), context, moa));
                }
            }
        }
    }
    debug_assert_eq!(configs.len(), LATTICE_SIZE);
    configs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn models() -> [ModelRef; 2] {
        [ModelRef::new("haiku", 0), ModelRef::new("sonnet", 1)]
    }

    #[test]
    fn lattice_has_exactly_25_distinct_configs() {
        let lattice = config_lattice(&models());
        assert_eq!(lattice.len(), 25);
        let ids: HashSet<String> = lattice.iter().map(|c| c.cell_id()).collect();
        assert_eq!(ids.len(), 25, "cell ids must be distinct");
        for config in &lattice {
            config.validate().unwrap();
        }
    }

    #[test]
    fn ewa_config_is_context_free() {
        let ewa = AgentConfig::ewa();
        assert_eq!(ewa.cell_id(), "ewa");
        assert_eq!(ewa.agent_kind.ordinal(), 0);
        assert_eq!(ewa.context.ordinal(), 0);
        assert!(!ewa.moa);

        let mut corrupt = ewa.clone();
        corrupt.moa = true;
        assert_eq!(corrupt.validate(), Err(ConfigError::EwaExtras));
    }

    #[test]
    fn no_context_configs_reject_roles() {
        let config = AgentConfig::llm(
            AgentKind::Simple,
            ModelRef::new("haiku", 0),
            ContextKind::None,
            false,
        );
        assert_eq!(config.with_role(Role::Student), Err(ConfigError::UnexpectedRole));
        assert!(config.with_role(Role::Unspecified).is_ok());
    }

    #[test]
    fn role_resolution_shows_up_in_the_config_id() {
        let config = AgentConfig::llm(
            AgentKind::Reasoner,
            ModelRef::new("sonnet", 1),
            ContextKind::Biography,
            true,
        );
        let resolved = config.with_role(Role::Expert).unwrap();
        assert_eq!(resolved.config_id(), "r_sonnet_cbio_m1@expert");
        assert_eq!(resolved.cell_id(), config.cell_id());
        assert!(resolved.supports_roles());
    }
}
