use crate::describe::GameDescription;
use crate::spec::GameSpec;
use crate::utility::{score_pair, MatchResult};

/// An agent's interpretation function: description in, integer guess out.
///
/// The trace type carries whatever the agent wants recorded about how the
/// guess was produced (prompt/response transcripts for language agents, unit
/// for simple stubs).
pub trait Agent {
    type Trace;

    fn decide(&mut self, description: &GameDescription) -> AgentMove<Self::Trace>;
}

/// One agent's contribution to a match. `guess` is `Err` when the agent
/// failed to produce a usable integer (transport failure, unparseable or
/// out-of-range response); the reason string is preserved for the record.
#[derive(Debug, Clone)]
pub struct AgentMove<T> {
    pub guess: Result<i64, String>,
    pub trace: T,
}

/// Umpire record of a single pairing. `result` is present only when both
/// guesses were usable and in range; an incomplete match keeps both moves so
/// nothing is silently dropped.
#[derive(Debug, Clone)]
pub struct MatchRecord<T> {
    pub spec: GameSpec,
    pub result: Option<MatchResult>,
    pub moves: (AgentMove<T>, AgentMove<T>),
}

impl<T> MatchRecord<T> {
    pub fn is_complete(&self) -> bool {
        self.result.is_some()
    }
}

/// Run one simultaneous-move match: each agent decides against the same
/// description with no knowledge of the other's guess, then the pair is
/// scored. Out-of-range integers are retained in the moves but invalidate
/// the match result.
pub fn play_match<T>(
    a: &mut dyn Agent<Trace = T>,
    b: &mut dyn Agent<Trace = T>,
    spec: &GameSpec,
) -> MatchRecord<T> {
    let description = crate::describe::describe_game(spec);
    let move_a = a.decide(&description);
    let move_b = b.decide(&description);
    let accepted = |m: &AgentMove<T>| m.guess.as_ref().ok().copied().filter(|&g| spec.contains(g));
    let result = match (accepted(&move_a), accepted(&move_b)) {
        (Some(ga), Some(gb)) => Some(score_pair(ga, gb, spec).expect("accepted guesses in range")),
        _ => None,
    };
    MatchRecord {
        spec: spec.clone(),
        result,
        moves: (move_a, move_b),
    }
}

/// Test stub: always guesses the same number.
#[derive(Debug, Clone, Copy)]
pub struct FixedGuess(pub i64);

impl Agent for FixedGuess {
    type Trace = ();

    fn decide(&mut self, _description: &GameDescription) -> AgentMove<()> {
        AgentMove {
            guess: Ok(self.0),
            trace: (),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_stub_wins_the_match() {
        let spec = GameSpec::two_thirds_standard();
        // mu = 25, target = 50/3: 20 is ~3.33 away, 30 is ~13.33 away.
        let record = play_match(&mut FixedGuess(20), &mut FixedGuess(30), &spec);
        let result = record.result.unwrap();
        assert_eq!(result.utility_i.value(), 1.0);
        assert_eq!(result.utility_j.value(), 0.0);
    }

    #[test]
    fn symmetric_zero_guesses_tie() {
        let spec = GameSpec::two_thirds_standard();
        let record = play_match(&mut FixedGuess(0), &mut FixedGuess(0), &spec);
        let result = record.result.unwrap();
        assert_eq!(result.utility_i.value(), 0.5);
        assert_eq!(result.utility_j.value(), 0.5);
    }

    #[test]
    fn zero_wins_against_every_positive_stub() {
        let spec = GameSpec::two_thirds_standard();
        for k in [1, 2, 17, 50, 100] {
            let record = play_match(&mut FixedGuess(0), &mut FixedGuess(k), &spec);
            assert_eq!(record.result.unwrap().utility_i.value(), 1.0, "k={k}");
        }
    }

    #[test]
    fn out_of_range_guess_marks_match_incomplete() {
        let spec = GameSpec::two_thirds_standard();
        let record = play_match(&mut FixedGuess(500), &mut FixedGuess(30), &spec);
        assert!(!record.is_complete());
        // The offending move is retained, not dropped.
        assert_eq!(record.moves.0.guess, Ok(500));
    }

    struct Failing;

    impl Agent for Failing {
        type Trace = ();

        fn decide(&mut self, _d: &GameDescription) -> AgentMove<()> {
            AgentMove {
                guess: Err("no usable number in response".into()),
                trace: (),
            }
        }
    }

    #[test]
    fn failed_agent_marks_match_incomplete() {
        let spec = GameSpec::two_thirds_standard();
        let record = play_match(&mut Failing, &mut FixedGuess(30), &spec);
        assert!(record.result.is_none());
        assert!(record.moves.0.guess.is_err());
    }
}
