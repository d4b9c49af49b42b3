use crate::backend::{
    BackendError, BackendKind, CallKind, CompletionRequest, CompletionResponse, LlmBackend,
};
use crate::config::Role;
use serde::{Deserialize, Serialize};

/// Deterministic scripted backend. Responses are a pure function of the
/// script and the request (prompt + episode coordinates); no state, no
/// randomness, safe to call concurrently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubScript {
    /// Substring matchers checked against the prompt first; the first hit
    /// answers verbatim.
    #[serde(default)]
    pub rules: Vec<StubRule>,
    /// Behaviour when no rule matches and the call expects a decision.
    pub default: StubDefault,
    /// Response to belief-elicitation calls (Reasoner call 1).
    #[serde(default = "default_belief_text")]
    pub belief_text: String,
}

/// Belief-call response used when a script does not set its own.
pub fn default_belief_text() -> String {
    "I expect the other player to pick something around the middle of the allowed range."
        .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubRule {
    pub contains: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StubDefault {
    /// Same response text for every decision call.
    Fixed { text: String },
    /// Range-anchored spread: guess = low + (a*episode + b*cell + c) mod |A|.
    Formula { a: i64, b: i64, c: i64 },
    /// Replay recorded guesses: episodes with a role draw from their
    /// cohort's list (indexed by episode/2 under the runner's alternating
    /// role assignment), roleless episodes draw from `pooled`.
    Replay {
        student: Vec<i64>,
        expert: Vec<i64>,
        pooled: Vec<i64>,
    },
    /// Always the same number, ignoring the game's stated range.
    Constant { value: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedStub {
    script: StubScript,
}

impl ScriptedStub {
    pub fn new(script: StubScript) -> Self {
        Self { script }
    }

    /// Convenience: a range-anchored formula stub with mild spread.
    pub fn formula(a: i64, b: i64, c: i64) -> Self {
        Self::new(StubScript {
            rules: Vec::new(),
            default: StubDefault::Formula { a, b, c },
            belief_text: default_belief_text(),
        })
    }

    fn decision_guess(&self, req: &CompletionRequest) -> Result<Option<i64>, BackendError> {
        let meta = req.meta;
        match &self.script.default {
            StubDefault::Fixed { .. } => Ok(None),
            StubDefault::Formula { a, b, c } => {
                let span = meta.high - meta.low + 1;
                let mix = a
                    .wrapping_mul(meta.episode as i64)
                    .wrapping_add(b.wrapping_mul(meta.cell_ordinal as i64))
                    .wrapping_add(*c);
                Ok(Some(meta.low + mix.rem_euclid(span)))
            }
            StubDefault::Replay {
                student,
                expert,
                pooled,
            } => {
                let (list, idx) = match meta.role {
                    Role::Student => (student, meta.episode as usize / 2),
                    Role::Expert => (expert, meta.episode as usize / 2),
                    Role::Unspecified => (pooled, meta.episode as usize),
                };
                if list.is_empty() {
                    return Err(BackendError::Protocol(format!(
                        "replay stub has no guesses for role {:?}",
                        meta.role
                    )));
                }
                Ok(Some(list[idx % list.len()]))
            }
            StubDefault::Constant { value } => Ok(Some(*value)),
        }
    }
}

impl LlmBackend for ScriptedStub {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let text = if let Some(rule) = self
            .script
            .rules
            .iter()
            .find(|r| req.prompt.contains(&r.contains))
        {
            rule.text.clone()
        } else if req.meta.call == CallKind::Belief {
            self.script.belief_text.clone()
        } else {
            match self.decision_guess(req)? {
                Some(guess) => format!("I considered the game.\nFINAL ANSWER: {guess}"),
                None => match &self.script.default {
                    StubDefault::Fixed { text } => text.clone(),
                    _ => unreachable!("decision_guess covers non-fixed defaults"),
                },
            }
        };
        Ok(CompletionResponse {
            text,
            tokens_in: None,
            tokens_out: None,
            http_exchange: None,
        })
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Stub
    }
}
