use crate::{AttractionState, EwaError, EwaParams};
use game_core::{utility, GameSpec};

/// Surprise decomposition at round t: cumulative opponent-strategy
/// frequencies `h`, the one-hot most-recent-strategy vector `r`, and the
/// surprise index `s = sum_k (h_k - r_k)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurpriseComponents {
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub s: f64,
}

/// Compute the surprise components from a non-empty opponent history over
/// the strategy space of `spec`.
pub fn surprise(history: &[i64], spec: &GameSpec) -> Result<SurpriseComponents, EwaError> {
    if history.is_empty() {
        return Err(EwaError::EmptyHistory);
    }
    let m = spec.n_actions();
    let t = history.len() as f64;
    let mut h = vec![0.0; m];
    for &s in history {
        h[spec.index_of(s)] += 1.0;
    }
    for hk in &mut h {
        *hk /= t;
    }
    let mut r = vec![0.0; m];
    r[spec.index_of(*history.last().expect("non-empty"))] = 1.0;
    let s = h
        .iter()
        .zip(&r)
        .map(|(hk, rk)| (hk - rk) * (hk - rk))
        .sum();
    Ok(SurpriseComponents { h, r, s })
}

/// Change detector: phi = 1 - s/2, in [0, 1] since s is in [0, 2].
pub fn phi(s: f64) -> f64 {
    1.0 - 0.5 * s
}

/// Experience weight recursion N(t) = (1 - kappa) * phi * N(t-1) + 1.
pub fn update_experience_weight(n_prev: f64, phi: f64, params: &EwaParams) -> f64 {
    (1.0 - params.kappa) * phi * n_prev + 1.0
}

/// Reinforcement of strategy `j` after a round where `own_play` met
/// `opp_play`: `[delta + (1 - delta) * I(j, own_play)] * pi(j, opp_play)`,
/// with delta = 1 iff the foregone payoff weakly beats the realized payoff.
pub fn reinforcement(
    j: i64,
    own_play: i64,
    opp_play: i64,
    spec: &GameSpec,
) -> Result<f64, EwaError> {
    let foregone = utility(j, opp_play, spec)?.0;
    let realized = utility(own_play, opp_play, spec)?.0;
    let delta = if foregone >= realized { 1.0 } else { 0.0 };
    let chosen = if j == own_play { 1.0 } else { 0.0 };
    Ok((delta + (1.0 - delta) * chosen) * foregone)
}

/// One full attraction update after observing (own_play, opp_play):
/// appends the opponent play to the history, recomputes the change
/// detector, then maps each attraction through
/// `(phi * N(t-1) * A_j(t-1) + Reinforcement_j) / divisor` where the
/// divisor is `N(t-1) * phi * (1 - kappa)`, plus one when
/// `denominator_plus_one` is set. Finally advances N and t.
pub fn update_attractions(
    state: &AttractionState,
    own_play: i64,
    opp_play: i64,
    spec: &GameSpec,
    params: &EwaParams,
) -> Result<AttractionState, EwaError> {
    spec.check_action(own_play)?;
    spec.check_action(opp_play)?;

    let mut history = state.opponent_history.clone();
    history.push(opp_play);
    let s = surprise(&history, spec)?;
    let phi_t = phi(s.s);

    let mut divisor = state.n * phi_t * (1.0 - params.kappa);
    if params.denominator_plus_one {
        divisor += 1.0;
    }
    if divisor == 0.0 {
        return Err(EwaError::ZeroDivisor);
    }

    let mut attractions = Vec::with_capacity(state.attractions.len());
    for (idx, j) in spec.actions().enumerate() {
        let memory = phi_t * state.n * state.attractions[idx];
        let reinf = reinforcement(j, own_play, opp_play, spec)?;
        attractions.push((memory + reinf) / divisor);
    }

    Ok(AttractionState {
        attractions,
        n: update_experience_weight(state.n, phi_t, params),
        t: state.t + 1,
        opponent_history: history,
        phi: phi_t,
    })
}
