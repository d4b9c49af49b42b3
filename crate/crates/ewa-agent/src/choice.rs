use crate::{init_attractions, update_attractions, AttractionState, EwaError, EwaParams};
use game_core::{Agent, AgentMove, GameDescription, GameSpec};
use rand::Rng;

/// Logit choice probabilities over an attraction vector, stabilized by
/// subtracting the maximum before exponentiation (probability-identical).
pub fn choice_distribution(attractions: &[f64], lambda: f64) -> Vec<f64> {
    let max = attractions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = attractions.iter().map(|a| (lambda * (a - max)).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|e| e / z).collect()
}

/// Sample one strategy from the logit law of the current attractions.
pub fn choose<R: Rng + ?Sized>(
    state: &AttractionState,
    params: &EwaParams,
    spec: &GameSpec,
    rng: &mut R,
) -> i64 {
    let probs = choice_distribution(&state.attractions, params.lambda);
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (idx, p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return spec.action_at(idx);
        }
    }
    spec.high()
}

/// One-shot interface: build the cognitive-hierarchy initial attractions
/// and sample a single guess from their logit law. Consumes the game tuple
/// directly, never natural language.
pub fn i_ewa<R: Rng + ?Sized>(spec: &GameSpec, params: &EwaParams, rng: &mut R) -> i64 {
    let state = init_attractions(spec, params);
    choose(&state, params, spec, rng)
}

/// The exact one-shot law: softmax of the initial attractions. Oracle for
/// goodness-of-fit checks on sampled guesses.
pub fn one_shot_law(spec: &GameSpec, params: &EwaParams) -> Vec<f64> {
    let state = init_attractions(spec, params);
    choice_distribution(&state.attractions, params.lambda)
}

/// Mean and standard deviation of a probability law over the action range.
pub fn law_mean_sd(law: &[f64], spec: &GameSpec) -> (f64, f64) {
    let mean: f64 = law
        .iter()
        .enumerate()
        .map(|(idx, p)| p * spec.action_at(idx) as f64)
        .sum();
    let var: f64 = law
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let d = spec.action_at(idx) as f64 - mean;
            p * d * d
        })
        .sum();
    (mean, var.sqrt())
}

/// Iterated-play distribution: independent EWA-vs-EWA duels, each updating
/// attractions for `rounds` rounds, collecting both players' final-round
/// guesses. Exercises the full update recursion beyond the one-shot
/// interface.
pub fn self_play_samples<R: Rng + ?Sized>(
    spec: &GameSpec,
    params: &EwaParams,
    rounds: u32,
    pairs: u32,
    rng: &mut R,
) -> Result<Vec<i64>, EwaError> {
    let initial = init_attractions(spec, params);
    let mut samples = Vec::with_capacity(2 * pairs as usize);
    for _ in 0..pairs {
        let mut a = initial.clone();
        let mut b = initial.clone();
        let mut last = (spec.low(), spec.low());
        for _ in 0..rounds {
            let ga = choose(&a, params, spec, rng);
            let gb = choose(&b, params, spec, rng);
            a = update_attractions(&a, ga, gb, spec, params)?;
            b = update_attractions(&b, gb, ga, spec, params)?;
            last = (ga, gb);
        }
        samples.push(last.0);
        samples.push(last.1);
    }
    Ok(samples)
}

/// Umpire-facing wrapper: an EWA player that translates the description
/// back into the game tuple and samples its one-shot guess.
pub struct EwaPlayer<R: Rng> {
    pub params: EwaParams,
    pub rng: R,
}

impl<R: Rng> Agent for EwaPlayer<R> {
    type Trace = ();

    fn decide(&mut self, description: &GameDescription) -> AgentMove<()> {
        let guess = match game_core::translate(description) {
            Ok(spec) => Ok(i_ewa(&spec, &self.params, &mut self.rng)),
            Err(e) => Err(format!("translation failed: {e}")),
        };
        AgentMove { guess, trace: () }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_attractions_give_uniform_probabilities() {
        let probs = choice_distribution(&[0.7; 10], 2.39);
        for p in &probs {
            assert!(close(*p, 0.1, 1e-12));
        }
    }

    #[test]
    fn two_strategy_logit_matches_closed_form() {
        let probs = choice_distribution(&[1.0, 0.0], 2.39);
        let expected = (2.39f64).exp() / ((2.39f64).exp() + 1.0);
        assert!(close(probs[0], expected, 1e-12));
        assert!(close(probs[0], 0.916, 5e-4));
    }

    #[test]
    fn probabilities_sum_to_one_and_shift_invariant() {
        let base = [0.1, 0.9, 0.4, 0.2, 0.75];
        let shifted: Vec<f64> = base.iter().map(|a| a + 123.0).collect();
        let p1 = choice_distribution(&base, 2.39);
        let p2 = choice_distribution(&shifted, 2.39);
        assert!(close(p1.iter().sum::<f64>(), 1.0, 1e-12));
        for (a, b) in p1.iter().zip(&p2) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn extreme_lambda_degenerates_to_argmax() {
        let probs = choice_distribution(&[0.2, 0.9, 0.5], 1e6);
        assert!(probs[1] > 1.0 - 1e-9);
    }

    #[test]
    fn zero_lambda_samples_uniformly() {
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams {
            lambda: 0.0,
            ..EwaParams::default()
        };
        let law = one_shot_law(&spec, &params);
        for p in &law {
            assert!(close(*p, 1.0 / 101.0, 1e-12));
        }
        let (mean, _) = law_mean_sd(&law, &spec);
        assert!(close(mean, 50.0, 1e-9));
    }

    #[test]
    fn sampling_matches_the_analytic_law_roughly() {
        // Coarse two-sided check at n = 4000; the strict chi-square
        // goodness-of-fit gate lives in the acceptance suite.
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams::default();
        let law = one_shot_law(&spec, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 4000;
        let mut counts = vec![0u32; spec.n_actions()];
        for _ in 0..n {
            counts[spec.index_of(i_ewa(&spec, &params, &mut rng))] += 1;
        }
        let (law_mean, law_sd) = law_mean_sd(&law, &spec);
        let sample_mean: f64 =
            counts.iter().enumerate().map(|(i, c)| *c as f64 * i as f64).sum::<f64>() / n as f64;
        let se = law_sd / (n as f64).sqrt();
        assert!(
            (sample_mean - law_mean).abs() < 4.0 * se,
            "sample mean {sample_mean} vs law mean {law_mean} (se {se})"
        );
    }

    #[test]
    fn self_play_runs_the_full_recursion() {
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = self_play_samples(&spec, &params, 5, 20, &mut rng).unwrap();
        assert_eq!(samples.len(), 40);
        assert!(samples.iter().all(|g| spec.contains(*g)));
    }

    #[test]
    fn attraction_dump_is_one_row_per_action() {
        let spec = GameSpec::two_thirds_standard();
        let state = crate::init_attractions(&spec, &EwaParams::default());
        let mut buffer = Vec::new();
        state.write_csv(&spec, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("action,attraction"));
        assert_eq!(lines.count(), 101);
        assert!(text.contains("\n0,"));
        assert!(text.contains("\n100,"));
    }

    #[test]
    fn ewa_player_translates_and_guesses_in_range() {
        let spec = GameSpec::two_thirds_shifted();
        let mut player = EwaPlayer {
            params: EwaParams::default(),
            rng: ChaCha8Rng::seed_from_u64(3),
        };
        let record = game_core::play_match(&mut player, &mut game_core::FixedGuess(150), &spec);
        let result = record.result.expect("both guesses valid");
        assert!(spec.contains(result.guess_i));
    }
}
