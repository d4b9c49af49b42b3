//! Self-tuning experience weighted attraction (EWA) agent.
//!
//! EWA (Camerer & Ho's self-tuning variant) keeps one attraction value per
//! strategy, updated each round from a memory term and a reinforcement term,
//! with the decay driven by a surprise-based change detector instead of a
//! free decay parameter. Strategies are chosen with a logit rule over the
//! attraction vector.
//!
//! Initial attractions come from a Poisson cognitive hierarchy: each
//! strategy starts at its expected payoff against a mixture of a level-0
//! opponent (uniform over the action range by default) and level-k
//! opponents playing `round(a0 * p^k)`.
//!
//! The agent never consumes natural language; it takes the game tuple
//! directly. For one-shot play the interface is [`i_ewa`], which samples
//! once from the logit law of the initial attractions.

mod attraction;
mod choice;
mod hierarchy;

pub use attraction::{
    phi, reinforcement, surprise, update_attractions, update_experience_weight,
    SurpriseComponents,
};
pub use choice::{
    choice_distribution, choose, i_ewa, law_mean_sd, one_shot_law, self_play_samples, EwaPlayer,
};
pub use hierarchy::{init_attractions, poisson_ch_levels, CognitiveHierarchy};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EwaError {
    #[error("invalid EWA parameter: {0}")]
    InvalidParams(String),
    #[error("surprise index undefined on an empty opponent history")]
    EmptyHistory,
    #[error("attraction update divisor N(t-1)*phi*(1-kappa) is zero; enable denominator_plus_one to avoid")]
    ZeroDivisor,
    #[error(transparent)]
    Game(#[from] game_core::GameError),
}

/// Level-0 opponent model used in the cognitive-hierarchy initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Level0 {
    /// Level-0 plays uniformly at random over the action range.
    #[default]
    Uniform,
    /// Level-0 plays the range midpoint deterministically.
    Midpoint,
}

/// Parameters of the self-tuning EWA agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EwaParams {
    /// Logit sensitivity of the choice rule.
    pub lambda: f64,
    /// Poisson rate of the cognitive-hierarchy level distribution.
    pub tau: f64,
    /// Depreciation parameter; the self-tuning model pins this to 0.
    pub kappa: f64,
    /// Initial experience weight N(0); pinned to 1.
    pub n0: f64,
    /// Truncation level of the cognitive hierarchy (renormalized).
    pub k_max: usize,
    /// Level-0 opponent behavior in the initialization.
    pub level0: Level0,
    /// When true, attraction updates divide by `N(t-1)*phi*(1-kappa) + 1`
    /// (the updated experience weight) instead of `N(t-1)*phi*(1-kappa)`.
    pub denominator_plus_one: bool,
}

impl Default for EwaParams {
    fn default() -> Self {
        Self {
            lambda: 2.39,
            tau: 1.5,
            kappa: 0.0,
            n0: 1.0,
            k_max: 10,
            level0: Level0::Uniform,
            denominator_plus_one: false,
        }
    }
}

impl EwaParams {
    pub fn validate(&self) -> Result<(), EwaError> {
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(EwaError::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(EwaError::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.kappa != 0.0 {
            return Err(EwaError::InvalidParams(format!(
                "kappa is fixed at 0 in the self-tuning model, got {}",
                self.kappa
            )));
        }
        if self.n0 != 1.0 {
            return Err(EwaError::InvalidParams(format!(
                "initial experience weight is fixed at 1, got {}",
                self.n0
            )));
        }
        Ok(())
    }
}

/// Full EWA learner state: one attraction per strategy in the action range,
/// the experience weight, round counter, observed opponent plays and the
/// last change-detector value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionState {
    pub attractions: Vec<f64>,
    pub n: f64,
    pub t: u32,
    pub opponent_history: Vec<i64>,
    pub phi: f64,
}

impl AttractionState {
    /// Dump the attraction vector as `action,attraction` CSV rows.
    pub fn write_csv<W: std::io::Write>(
        &self,
        spec: &game_core::GameSpec,
        mut out: W,
    ) -> std::io::Result<()> {
        writeln!(out, "action,attraction")?;
        for (idx, a) in self.attractions.iter().enumerate() {
            writeln!(out, "{},{a}", spec.action_at(idx))?;
        }
        Ok(())
    }
}
