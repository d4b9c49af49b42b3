use crate::describe::mean;
use crate::StatError;
use llm_agent::AgentConfig;
use serde::{Deserialize, Serialize};

/// A reasoning level on the `a_k = a0 * p^k` ladder. Negative for guesses
/// above the level-0 anchor; capped for guess 0 (see [`ZERO_GUESS_K_CAP`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KLevel(pub f64);

/// k assigned to a zero guess under the capping policy: the level of the
/// smallest positive guess, ln(1/50)/ln(2/3) ~ 9.65 at the defaults.
/// The log transform is undefined at 0; capping keeps equilibrium players
/// on the scale instead of dropping them.
pub const ZERO_GUESS_K_CAP: f64 = 9.64823588318369;

/// How zero guesses enter k-level aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZeroHandling {
    /// Map 0 to the cap k(1) (default).
    #[default]
    Cap,
    /// Drop zero guesses from k-level aggregates.
    Exclude,
}

/// Invert the ladder: k = ln(guess/a0) / ln(p), with guess 0 capped at
/// k(1). Negative guesses have no level.
pub fn to_k_level(guess: f64, a0: f64, p: f64) -> Result<KLevel, StatError> {
    if guess < 0.0 {
        return Err(StatError::NegativeGuess(guess));
    }
    let effective = if guess == 0.0 { 1.0 } else { guess };
    Ok(KLevel((effective / a0).ln() / p.ln()))
}

/// Transform integer guesses to k-levels under a zero-handling policy.
pub fn k_levels(
    guesses: &[i64],
    a0: f64,
    p: f64,
    zeros: ZeroHandling,
) -> Result<Vec<f64>, StatError> {
    let mut ks = Vec::with_capacity(guesses.len());
    for &g in guesses {
        if g == 0 && zeros == ZeroHandling::Exclude {
            continue;
        }
        ks.push(to_k_level(g as f64, a0, p)?.0);
    }
    Ok(ks)
}

/// Absolute mean error between two k-level samples: `|mean(a) - mean(b)|`.
/// Mean-only by construction; distribution shape is handled elsewhere.
pub fn ame(true_ks: &[f64], pred_ks: &[f64]) -> Result<f64, StatError> {
    Ok((mean(true_ks)? - mean(pred_ks)?).abs())
}

/// Signed difference of per-cohort AMEs:
/// `|mean k student_true - mean k student_pred| - |mean k expert_true - mean k expert_pred|`.
/// Near zero means the agent mirrors the human student/expert gap; negative
/// means it sits closer to expert behaviour.
pub fn delta_subpop(
    student_true: &[f64],
    student_pred: &[f64],
    expert_true: &[f64],
    expert_pred: &[f64],
) -> Result<f64, StatError> {
    Ok(ame(student_true, student_pred)? - ame(expert_true, expert_pred)?)
}

/// Ordinal sophistication score: agent kind (EWA=0, Simple=1, Reasoner=2)
/// + context richness (0..2) + instruction (MoA adds 1) + model ordinal.
pub fn sophistication_score(config: &AgentConfig) -> u32 {
    config.agent_kind.ordinal() as u32
        + config.context.ordinal() as u32
        + config.instruction_ordinal() as u32
        + config.model_ordinal().unwrap_or(0) as u32
}
