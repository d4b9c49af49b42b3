use crate::config::{ConfigError, ContextKind, Role};
use game_core::GameDescription;
use serde::{Deserialize, Serialize};

/// Version tag of the prompt templates, recorded with every trace.
pub const PROMPT_TEMPLATE_VERSION: &str = "v1";

/// Marker every instruction asks for; guess extraction looks for it first.
pub const ANSWER_MARKER: &str = "FINAL ANSWER:";

/// The three model-of-appropriateness questions, required verbatim by the
/// MoA instruction variant.
pub const MOA_QUESTIONS: [&str; 3] = [
    "What kind of situation is this?",
    "What kind of person am I?",
    "What should a person like me do in a situation like this?",
];

/// A rendered agent context: which kind, which role, and the exact text
/// that goes in front of the game description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentContext {
    pub kind: ContextKind,
    pub role: Role,
    pub text: String,
}

impl AgentContext {
    pub fn new(kind: ContextKind, role: Role) -> Result<Self, ConfigError> {
        let text = match (kind, role) {
            (ContextKind::None, Role::Unspecified) => String::new(),
            (ContextKind::None, _) => return Err(ConfigError::UnexpectedRole),
            (_, Role::Unspecified) => return Err(ConfigError::MissingRole(kind)),
            (ContextKind::SimpleProfile, Role::Student) => {
                "You are a first-year undergraduate student with no training in game theory \
                 or strategic decision-making."
                    .to_string()
            }
            (ContextKind::SimpleProfile, Role::Expert) => {
                "You are a professional researcher with expert knowledge of game theory \
                 and strategic decision-making."
                    .to_string()
            }
            (ContextKind::Biography, Role::Student) => {
                "You are Jamie, a nineteen-year-old first-year undergraduate. You moved to the \
                 city last autumn for university and are still finding your feet: lectures in the \
                 morning, a part-time job at the campus cafe, and evenings spent with flatmates \
                 who argue about football and music. You have never taken a course in economics, \
                 game theory, or anything mathematical beyond compulsory school algebra, and you \
                 have never heard of guessing games like this one. You tend to trust your gut, \
                 decide quickly, and move on."
                    .to_string()
            }
            (ContextKind::Biography, Role::Expert) => {
                "You are Dr. Morgan Reyes, a senior researcher in behavioural economics. You have \
                 spent two decades studying strategic interaction: you publish on bounded \
                 rationality, referee for decision-science journals, and you regularly attend \
                 economics and psychology conferences on decision making. You know the classic \
                 results on dominance, iterated reasoning, and how real people actually play \
                 these games. You enjoy working out the incentives of a situation carefully \
                 before committing to a choice."
                    .to_string()
            }
        };
        Ok(Self { kind, role, text })
    }
}

/// A rendered instruction: whether it carries the MoA questions and the
/// exact closing text of the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionModel {
    pub moa: bool,
    pub text: String,
}

impl InstructionModel {
    pub fn new(moa: bool) -> Self {
        let text = if moa {
            format!(
                "Before deciding, answer these three questions in order: \
                 (1) {} (2) {} (3) {} \
                 Then pick your number. End your reply with a single line of the form:\n\
                 {} <your number>",
                MOA_QUESTIONS[0], MOA_QUESTIONS[1], MOA_QUESTIONS[2], ANSWER_MARKER
            )
        } else {
            format!(
                "Pick your number. You may explain your thinking briefly. \
                 End your reply with a single line of the form:\n{} <your number>",
                ANSWER_MARKER
            )
        };
        Self { moa, text }
    }
}

/// A composed prompt plus the template version it was rendered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub text: String,
    pub template_version: String,
}

fn bundle(sections: &[&str]) -> PromptBundle {
    let text = sections
        .iter()
        .filter(|s| !s.is_empty())
        .cloned()
        .collect::<Vec<_>>()
        .join("\n\n");
    PromptBundle {
        text,
        template_version: PROMPT_TEMPLATE_VERSION.to_string(),
    }
}

/// Deterministic concatenation: context (if any), game description,
/// instruction. Used directly as the single Simple-agent prompt.
pub fn compose_prompt(
    description: &GameDescription,
    context: &AgentContext,
    instruction: &InstructionModel,
) -> PromptBundle {
    bundle(&[&context.text, &description.text, &instruction.text])
}

/// First Reasoner call: elicit a belief about the opponent's guess, without
/// committing to an own choice yet.
pub fn compose_belief_prompt(
    description: &GameDescription,
    context: &AgentContext,
    instruction: &InstructionModel,
) -> PromptBundle {
    let elicitation = if instruction.moa {
        format!(
            "Think about the other player. Answer these three questions in order: \
             (1) {} (2) {} (3) {} \
             Then state in a few sentences what number you expect the other player to pick, \
             and why. Do not state your own choice yet.",
            MOA_QUESTIONS[0], MOA_QUESTIONS[1], MOA_QUESTIONS[2]
        )
    } else {
        "Think about the other player. State in a few sentences what number you expect \
         the other player to pick, and why. Do not state your own choice yet."
            .to_string()
    };
    bundle(&[&context.text, &description.text, &elicitation])
}

/// Second Reasoner call: decide given the previously formed belief.
pub fn compose_decision_prompt(
    description: &GameDescription,
    context: &AgentContext,
    instruction: &InstructionModel,
    belief: &str,
) -> PromptBundle {
    let belief_block = format!(
        "You already thought about the other player and formed this belief:\n\"{belief}\""
    );
    bundle(&[&context.text, &description.text, &belief_block, &instruction.text])
}

#[cfg(test)]
mod tests {
    use super::*;
    use game_core::{describe_game, GameSpec};

    fn description() -> GameDescription {
        describe_game(&GameSpec::two_thirds_standard())
    }

    #[test]
    fn bare_prompt_is_description_plus_instruction_only() {
        let ctx = AgentContext::new(ContextKind::None, Role::Unspecified).unwrap();
        let p = compose_prompt(&description(), &ctx, &InstructionModel::new(false));
        assert!(p.text.starts_with("You are playing a one-shot guessing game"));
        assert!(p.text.contains("Pick your number"));
        assert!(!p.text.contains("undergraduate"));
        assert!(!p.text.contains(MOA_QUESTIONS[0]));
    }

    #[test]
    fn expert_profile_shows_up_in_the_prompt() {
        let ctx = AgentContext::new(ContextKind::SimpleProfile, Role::Expert).unwrap();
        let p = compose_prompt(&description(), &ctx, &InstructionModel::new(false));
        assert!(p.text.contains("expert knowledge of game theory"));
    }

    #[test]
    fn biography_with_moa_contains_all_three_questions() {
        let ctx = AgentContext::new(ContextKind::Biography, Role::Student).unwrap();
        let p = compose_prompt(&description(), &ctx, &InstructionModel::new(true));
        assert!(p.text.contains("Jamie"));
        for q in MOA_QUESTIONS {
            assert!(p.text.contains(q), "missing question {q:?}");
        }
    }

    #[test]
    fn moa_instruction_carries_the_questions_verbatim() {
        let instr = InstructionModel::new(true);
        for q in MOA_QUESTIONS {
            assert!(instr.text.contains(q));
        }
        assert!(InstructionModel::new(false).text.contains(ANSWER_MARKER));
    }

    #[test]
    fn prompt_length_grows_with_context_and_instruction_richness() {
        let desc = description();
        for role in [Role::Student, Role::Expert] {
            let contexts = [
                AgentContext::new(ContextKind::None, Role::Unspecified).unwrap(),
                AgentContext::new(ContextKind::SimpleProfile, role).unwrap(),
                AgentContext::new(ContextKind::Biography, role).unwrap(),
            ];
            for pair in contexts.windows(2) {
                for moa in [false, true] {
                    let shorter = compose_prompt(&desc, &pair[0], &InstructionModel::new(moa));
                    let longer = compose_prompt(&desc, &pair[1], &InstructionModel::new(moa));
                    assert!(shorter.text.len() <= longer.text.len());
                }
            }
            for ctx in &contexts {
                let m0 = compose_prompt(&desc, ctx, &InstructionModel::new(false));
                let m1 = compose_prompt(&desc, ctx, &InstructionModel::new(true));
                assert!(m0.text.len() <= m1.text.len());
            }
        }
    }

    #[test]
    fn belief_prompt_never_asks_for_the_final_answer() {
        let ctx = AgentContext::new(ContextKind::None, Role::Unspecified).unwrap();
        let p = compose_belief_prompt(&description(), &ctx, &InstructionModel::new(false));
        assert!(!p.text.contains(ANSWER_MARKER));
        assert!(p.text.contains("Do not state your own choice yet"));
    }

    #[test]
    fn decision_prompt_embeds_the_belief() {
        let ctx = AgentContext::new(ContextKind::SimpleProfile, Role::Student).unwrap();
        let p = compose_decision_prompt(
            &description(),
            &ctx,
            &InstructionModel::new(false),
            "they will probably pick 50",
        );
        assert!(p.text.contains("they will probably pick 50"));
        assert!(p.text.contains(ANSWER_MARKER));
    }

    #[test]
    fn missing_role_for_profile_contexts_is_rejected() {
        assert_eq!(
            AgentContext::new(ContextKind::SimpleProfile, Role::Unspecified),
            Err(ConfigError::MissingRole(ContextKind::SimpleProfile))
        );
        assert_eq!(
            AgentContext::new(ContextKind::None, Role::Expert),
            Err(ConfigError::UnexpectedRole)
        );
    }
}
