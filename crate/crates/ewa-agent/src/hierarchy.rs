use crate::{AttractionState, EwaParams, Level0};
use game_core::{utility, GameSpec, Rational};

/// Truncated Poisson cognitive hierarchy over reasoning levels 0..=k_max.
#[derive(Debug, Clone, PartialEq)]
pub struct CognitiveHierarchy {
    /// P(k) for k = 0..=k_max, renormalized to sum to 1.
    pub weights: Vec<f64>,
    /// Raw Poisson masses e^(-tau) tau^k / k! before renormalization.
    pub raw_weights: Vec<f64>,
    /// Level-k guesses a_k = round(a0 * p^k), clamped into the action range.
    pub level_guesses: Vec<i64>,
}

/// Poisson level weights and the level-guess ladder for a game.
///
/// The level-0 anchor a0 is the midpoint of the action range; level-k
/// guesses follow the geometric ladder a_k = round(a0 * p^k) in exact
/// rational arithmetic, rounded half away from zero.
pub fn poisson_ch_levels(spec: &GameSpec, params: &EwaParams) -> CognitiveHierarchy {
    let mut raw_weights = Vec::with_capacity(params.k_max + 1);
    let mut mass = (-params.tau).exp();
    for k in 0..=params.k_max {
        if k > 0 {
            mass *= params.tau / k as f64;
        }
        raw_weights.push(mass);
    }
    let total: f64 = raw_weights.iter().sum();
    let weights: Vec<f64> = raw_weights.iter().map(|w| w / total).collect();

    let a0 = spec.midpoint();
    let mut level_guesses = Vec::with_capacity(params.k_max + 1);
    let mut pk = Rational::new(1, 1);
    for _ in 0..=params.k_max {
        let guess = (a0 * pk).round().to_integer();
        level_guesses.push(guess.clamp(spec.low(), spec.high()));
        pk *= spec.p();
    }

    CognitiveHierarchy {
        weights,
        raw_weights,
        level_guesses,
    }
}

/// Initial attractions: each strategy's expected payoff against the
/// cognitive-hierarchy opponent mixture. Level 0 plays uniformly over the
/// range (or the midpoint, per config); level k >= 1 plays its ladder guess.
pub fn init_attractions(spec: &GameSpec, params: &EwaParams) -> AttractionState {
    let ch = poisson_ch_levels(spec, params);
    let n_actions = spec.n_actions();

    let mut attractions = vec![0.0; n_actions];
    for (idx, j) in spec.actions().enumerate() {
        let mut expected = 0.0;
        for (k, &w) in ch.weights.iter().enumerate() {
            let payoff = if k == 0 {
                match params.level0 {
                    Level0::Uniform => expected_vs_uniform(j, spec),
                    Level0::Midpoint => pay(j, ch.level_guesses[0], spec),
                }
            } else {
                pay(j, ch.level_guesses[k], spec)
            };
            expected += w * payoff;
        }
        attractions[idx] = expected;
    }

    AttractionState {
        attractions,
        n: params.n0,
        t: 0,
        opponent_history: Vec::new(),
        phi: 1.0,
    }
}

fn pay(j: i64, opp: i64, spec: &GameSpec) -> f64 {
    // For p < 1 over a non-negative range the lower distinct guess always
    // wins: |a - t| < |b - t| reduces to (a - b)(a + b)(1 - p) < 0. The
    // shortcut keeps the O(|A|^2) initialization cheap; the exhaustive
    // utility path remains for ranges that straddle zero and is pinned to
    // this shortcut by the enumeration oracle tests.
    if spec.low() >= 0 {
        match j.cmp(&opp) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        }
    } else {
        utility(j, opp, spec).expect("actions from the spec range").0
    }
}

fn expected_vs_uniform(j: i64, spec: &GameSpec) -> f64 {
    if spec.low() >= 0 {
        let wins = (spec.high() - j) as f64;
        return (wins + 0.5) / spec.n_actions() as f64;
    }
    let mut total = 0.0;
    for b in spec.actions() {
        total += pay(j, b, spec);
    }
    total / spec.n_actions() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn poisson_masses_match_direct_evaluation() {
        let spec = GameSpec::two_thirds_standard();
        let ch = poisson_ch_levels(&spec, &EwaParams::default());
        // e^(-1.5) * 1.5^k / k! for k = 0, 1, 2.
        assert!(close(ch.raw_weights[0], 0.22313016014842982, 1e-12));
        assert!(close(ch.raw_weights[1], 0.33469524022264473, 1e-12));
        assert!(close(ch.raw_weights[2], 0.25102143016698355, 1e-12));
        assert!(close(ch.weights.iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn level_ladder_for_the_standard_game() {
        let spec = GameSpec::two_thirds_standard();
        let ch = poisson_ch_levels(&spec, &EwaParams::default());
        assert_eq!(ch.level_guesses[0], 50);
        assert_eq!(ch.level_guesses[1], 33);
        assert_eq!(ch.level_guesses[2], 22);
        assert_eq!(
            &ch.level_guesses[3..],
            &[15, 10, 7, 4, 3, 2, 1, 1],
            "ladder continues by exact rational rounding"
        );
    }

    #[test]
    fn tiny_tau_collapses_to_level_zero() {
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams {
            tau: 1e-12,
            ..EwaParams::default()
        };
        let ch = poisson_ch_levels(&spec, &params);
        assert!(ch.weights[0] > 1.0 - 1e-9);
    }

    #[test]
    fn uniform_component_matches_exhaustive_enumeration() {
        let spec = GameSpec::two_thirds_standard();
        // Independent oracle: re-sum the utility over all 101 opponent actions.
        for j in spec.actions() {
            let mut total = 0.0;
            for b in 0..=100 {
                total += utility(j, b, &spec).unwrap().0;
            }
            let oracle = total / 101.0;
            assert!(close(expected_vs_uniform(j, &spec), oracle, 1e-12), "j={j}");
        }
    }

    #[test]
    fn pairwise_shortcut_matches_the_utility_function_on_both_grids() {
        for spec in [GameSpec::two_thirds_standard(), GameSpec::two_thirds_shifted()] {
            for j in spec.actions() {
                for b in spec.actions() {
                    assert_eq!(pay(j, b, &spec), utility(j, b, &spec).unwrap().0);
                }
            }
        }
    }

    #[test]
    fn argmax_attraction_sits_below_the_hierarchy_mean() {
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams::default();
        let state = init_attractions(&spec, &params);
        let argmax = state
            .attractions
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| spec.action_at(i))
            .unwrap();

        // Brute-force mean of the opponent mixture.
        let ch = poisson_ch_levels(&spec, &params);
        let mut mixture_mean = ch.weights[0] * 50.0;
        for k in 1..ch.weights.len() {
            mixture_mean += ch.weights[k] * ch.level_guesses[k] as f64;
        }
        assert!(
            (argmax as f64) < mixture_mean,
            "argmax {argmax} vs mixture mean {mixture_mean
            }"
        );
    }

    #[test]
    fn deep_ladder_reaches_zero_and_contributes_the_tie_payoff() {
        let spec = GameSpec::two_thirds_standard();
        // At k_max = 12 the ladder bottoms out at 0 (50 * (2/3)^12 < 0.5), so
        // strategy 0 meets a level-12 opponent in a tie worth 0.5.
        let params = EwaParams {
            k_max: 12,
            ..EwaParams::default()
        };
        let ch = poisson_ch_levels(&spec, &params);
        assert_eq!(*ch.level_guesses.last().unwrap(), 0);

        let state = init_attractions(&spec, &params);
        let mut expected_zero = ch.weights[0] * expected_vs_uniform(0, &spec);
        for k in 1..=12 {
            let payoff = if ch.level_guesses[k] == 0 { 0.5 } else { 1.0 };
            expected_zero += ch.weights[k] * payoff;
        }
        assert!(close(state.attractions[0], expected_zero, 1e-12));
        // Strictly below the all-wins bound because of the tie contribution.
        let all_wins: f64 = ch.weights[0] * expected_vs_uniform(0, &spec)
            + ch.weights[1..].iter().sum::<f64>();
        assert!(state.attractions[0] < all_wins);
    }

    #[test]
    fn midpoint_level0_variant_uses_a_point_mass() {
        let spec = GameSpec::two_thirds_standard();
        let params = EwaParams {
            level0: Level0::Midpoint,
            ..EwaParams::default()
        };
        let state = init_attractions(&spec, &params);
        let ch = poisson_ch_levels(&spec, &params);
        // Against a point mass at 50 plus the ladder, strategy 50 collects
        // ties only from the level-0 component.
        let mut expected = ch.weights[0] * 0.5;
        for k in 1..ch.weights.len() {
            expected += ch.weights[k] * pay(50, ch.level_guesses[k], &spec);
        }
        assert!(close(state.attractions[spec.index_of(50)], expected, 1e-12));
    }
}
