use game_core::{describe_game, GameSpec};
use llm_agent::{compose_belief_prompt, compose_decision_prompt, compose_prompt, AgentContext, ContextKind, InstructionModel, Role};

fn main() {
    let desc = describe_game(&GameSpec::two_thirds_standard());
    let ctx = AgentContext::new(ContextKind::None, Role::Unspecified).unwrap();
    let instr = InstructionModel::new(false);
    println!("=== simple / no context / m0 ===\n{}\n", compose_prompt(&desc, &ctx, &instr).text);

    let ctx = AgentContext::new(ContextKind::SimpleProfile, Role::Expert).unwrap();
    let instr = InstructionModel::new(true);
    println!("=== simple / expert profile / m1 ===\n{}\n", compose_prompt(&desc, &ctx, &instr).text);

    let ctx = AgentContext::new(ContextKind::Biography, Role::Student).unwrap();
    let instr = InstructionModel::new(false);
    println!("=== reasoner belief / student bio / m0 ===\n{}\n", compose_belief_prompt(&desc, &ctx, &instr).text);
    println!("=== reasoner decision / student bio / m0 ===\n{}", compose_decision_prompt(&desc, &ctx, &instr, "I think they will pick around 30 because most people go below the midpoint.").text);
}
