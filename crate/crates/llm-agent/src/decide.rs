use crate::backend::{
    complete_with_retry, CallKind, CompletionRequest, CompletionResponse, EpisodeMeta,
    GenerationSettings, HttpExchange, LlmBackend, RetryPolicy,
};
use crate::config::{AgentConfig, AgentKind};
use crate::prompts::{
    compose_belief_prompt, compose_decision_prompt, compose_prompt, AgentContext,
    InstructionModel, PROMPT_TEMPLATE_VERSION,
};
use crate::trace::{count_tokens, parse_guess, ReasoningTrace, TRACE_SCHEMA_VERSION};
use game_core::{Agent, AgentMove, GameDescription};

/// Everything one episode needs: the backend, the fully resolved config
/// (role included), the game description and the episode coordinates.
pub struct EpisodeSetup<'a> {
    pub backend: &'a dyn LlmBackend,
    pub config: &'a AgentConfig,
    pub description: &'a GameDescription,
    pub settings: &'a GenerationSettings,
    pub retry: &'a RetryPolicy,
    pub cell_id: String,
    pub cell_ordinal: u32,
    pub episode: u32,
    pub seed: u64,
}

impl<'a> EpisodeSetup<'a> {
    fn meta(&self, call: CallKind) -> EpisodeMeta {
        EpisodeMeta {
            cell_id: self.cell_id.clone(),
            cell_ordinal: self.cell_ordinal,
            episode: self.episode,
            role: self.config.role,
            call,
            low: self.description.spec.low(),
            high: self.description.spec.high(),
            seed: self.seed,
        }
    }

    fn rendered(&self) -> (AgentContext, InstructionModel) {
        let context = AgentContext::new(self.config.context, self.config.role)
            .expect("episode config must carry a renderable context/role combination");
        (context, InstructionModel::new(self.config.moa))
    }

    fn template_version(&self) -> String {
        format!(
            "desc-{}+prompt-{}",
            self.description.template_version, PROMPT_TEMPLATE_VERSION
        )
    }

    fn call(&self, call: CallKind, prompt: &str) -> Result<CompletionResponse, String> {
        let meta = self.meta(call);
        let model = self
            .config
            .llm_model
            .as_ref()
            .map(|m| m.id.as_str())
            .unwrap_or("unmodelled");
        let request = CompletionRequest {
            model,
            prompt,
            settings: self.settings,
            meta: &meta,
        };
        complete_with_retry(self.backend, &request, self.retry).map_err(|e| e.to_string())
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        prompts: Vec<String>,
        responses: Vec<String>,
        reported: Vec<Option<(u64, u64)>>,
        exchanges: Vec<HttpExchange>,
        belief: Option<String>,
        parsed: Option<Result<i64, crate::trace::InvalidKind>>,
        failure: Option<String>,
    ) -> ReasoningTrace {
        let tokens = count_tokens(&prompts, &responses, &reported);
        let (guess, invalid_kind) = match parsed {
            Some(Ok(g)) => (Some(g), None),
            Some(Err(kind)) => (None, Some(kind)),
            None => (None, None),
        };
        ReasoningTrace {
            schema_version: TRACE_SCHEMA_VERSION,
            cell_id: self.cell_id.clone(),
            episode: self.episode,
            config: self.config.clone(),
            prompts,
            responses,
            belief,
            guess,
            valid: guess.is_some(),
            invalid_kind,
            failure,
            tokens_in: tokens.tokens_in,
            tokens_out: tokens.tokens_out,
            tokens_approximate: tokens.approximate,
            template_version: self.template_version(),
            seed: self.seed,
            generation: self.settings.clone(),
            http_exchanges: if exchanges.is_empty() {
                None
            } else {
                Some(exchanges)
            },
        }
    }
}

/// Simple architecture: exactly one completion maps the description to a
/// guess. A belief, if the model volunteers one, stays inside the response.
pub fn simple_decide(setup: &EpisodeSetup) -> ReasoningTrace {
    assert_eq!(
        setup.config.agent_kind,
        AgentKind::Simple,
        "simple_decide requires a Simple config"
    );
    let (context, instruction) = setup.rendered();
    let prompt = compose_prompt(setup.description, &context, &instruction);
    let prompts = vec![prompt.text.clone()];

    match setup.call(CallKind::Single, &prompt.text) {
        Ok(response) => {
            let parsed = parse_guess(&response.text, &setup.description.spec);
            let reported = vec![response.tokens_in.zip(response.tokens_out)];
            let exchanges: Vec<_> = response.http_exchange.into_iter().collect();
            setup.finish(
                prompts,
                vec![response.text],
                reported,
                exchanges,
                None,
                Some(parsed),
                None,
            )
        }
        Err(failure) => setup.finish(prompts, vec![], vec![], vec![], None, None, Some(failure)),
    }
}

/// Reasoner architecture: call 1 elicits a belief about the opponent's
/// guess, call 2 decides given that belief. A call-1 failure aborts the
/// episode before call 2.
pub fn reasoner_decide(setup: &EpisodeSetup) -> ReasoningTrace {
    assert_eq!(
        setup.config.agent_kind,
        AgentKind::Reasoner,
        "reasoner_decide requires a Reasoner config"
    );
    let (context, instruction) = setup.rendered();
    let belief_prompt = compose_belief_prompt(setup.description, &context, &instruction);
    let mut prompts = vec![belief_prompt.text.clone()];

    let belief_response = match setup.call(CallKind::Belief, &belief_prompt.text) {
        Ok(r) => r,
        Err(failure) => {
            return setup.finish(prompts, vec![], vec![], vec![], None, None, Some(failure))
        }
    };
    let belief = belief_response.text.clone();

    let decision_prompt =
        compose_decision_prompt(setup.description, &context, &instruction, &belief);
    prompts.push(decision_prompt.text.clone());

    let mut responses = vec![belief_response.text];
    let mut reported = vec![belief_response.tokens_in.zip(belief_response.tokens_out)];
    let mut exchanges: Vec<_> = belief_response.http_exchange.into_iter().collect();

    match setup.call(CallKind::Decision, &decision_prompt.text) {
        Ok(response) => {
            let parsed = parse_guess(&response.text, &setup.description.spec);
            reported.push(response.tokens_in.zip(response.tokens_out));
            exchanges.extend(response.http_exchange);
            responses.push(response.text);
            setup.finish(
                prompts,
                responses,
                reported,
                exchanges,
                Some(belief),
                Some(parsed),
                None,
            )
        }
        Err(failure) => setup.finish(
            prompts,
            responses,
            reported,
            exchanges,
            Some(belief),
            None,
            Some(failure),
        ),
    }
}

/// Dispatch on the configured architecture.
pub fn decide(setup: &EpisodeSetup) -> ReasoningTrace {
    match setup.config.agent_kind {
        AgentKind::Simple => simple_decide(setup),
        AgentKind::Reasoner => reasoner_decide(setup),
        AgentKind::Ewa => panic!("EWA episodes do not go through the LLM decision path"),
    }
}

/// Umpire-facing wrapper so LLM configs can play [`game_core::play_match`].
pub struct LlmPlayer<'a> {
    pub backend: &'a dyn LlmBackend,
    pub config: AgentConfig,
    pub settings: GenerationSettings,
    pub retry: RetryPolicy,
    pub seed: u64,
    episode: u32,
}

impl<'a> LlmPlayer<'a> {
    pub fn new(backend: &'a dyn LlmBackend, config: AgentConfig) -> Self {
        Self {
            backend,
            config,
            settings: GenerationSettings::default(),
            retry: RetryPolicy::default(),
            seed: 0,
            episode: 0,
        }
    }
}

impl Agent for LlmPlayer<'_> {
    type Trace = ReasoningTrace;

    fn decide(&mut self, description: &GameDescription) -> AgentMove<ReasoningTrace> {
        let setup = EpisodeSetup {
            backend: self.backend,
            config: &self.config,
            description,
            settings: &self.settings,
            retry: &self.retry,
            cell_id: self.config.cell_id(),
            cell_ordinal: 0,
            episode: self.episode,
            seed: self.seed,
        };
        self.episode += 1;
        let trace = decide(&setup);
        let guess = match (trace.guess, &trace.failure, trace.invalid_kind) {
            (Some(g), _, _) => Ok(g),
            (None, Some(f), _) => Err(f.clone()),
            (None, None, Some(kind)) => Err(format!("invalid response: {kind:?}")),
            (None, None, None) => Err("no guess produced".to_string()),
        };
        AgentMove { guess, trace }
    }
}
