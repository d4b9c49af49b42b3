//! LLM-driven guessing-game agents.
//!
//! Two architectures over a shared backend abstraction:
//!
//! * **Simple**: a single completion maps the game description (plus
//!   context and instruction) straight to a guess; any belief about the
//!   opponent stays implicit in the response.
//! * **Reasoner**: two completions, the first eliciting a natural-language
//!   belief about the opponent's guess, the second deciding given that
//!   belief.
//!
//! Agent behaviour is configured on a lattice of context richness
//! (none / simple profile / biography), instruction style (with or without
//! the model-of-appropriateness questions), the agent architecture, and the
//! backing model. Backends are either a real HTTP chat-completions endpoint
//! or a deterministic scripted stub for offline runs.

mod backend;
mod config;
mod decide;
mod prompts;
mod stub;
mod trace;

pub use backend::{
    complete_with_retry, BackendError, BackendKind, CallKind, CompletionRequest,
    CompletionResponse, EpisodeMeta, GenerationSettings, HttpChatBackend, HttpExchange,
    LlmBackend, RetryPolicy,
};
pub use config::{
    config_lattice, AgentConfig, AgentKind, ConfigError, ContextKind, ModelRef, Role,
    LATTICE_SIZE,
};
pub use decide::{reasoner_decide, simple_decide, EpisodeSetup, LlmPlayer};
pub use prompts::{
    compose_belief_prompt, compose_decision_prompt, compose_prompt, AgentContext,
    InstructionModel, PromptBundle, ANSWER_MARKER, MOA_QUESTIONS, PROMPT_TEMPLATE_VERSION,
};
pub use stub::{default_belief_text, ScriptedStub, StubDefault, StubRule, StubScript};
pub use trace::{
    count_tokens, parse_guess, InvalidKind, ReasoningTrace, TokenCount, TRACE_SCHEMA_VERSION,
};
