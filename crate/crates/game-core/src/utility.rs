use crate::spec::{rational_string, GameError, GameSpec, Rational};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Outcome of scoring one pair of guesses.
///
/// `mu` and `target` are kept as exact rationals; the tie case of the
/// utility is an exact equality of rational distances, never a float
/// coincidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub guess_i: i64,
    pub guess_j: i64,
    #[serde(with = "rational_string")]
    pub mu: Rational,
    #[serde(with = "rational_string")]
    pub target: Rational,
    pub utility_i: OrderedUtility,
    pub utility_j: OrderedUtility,
}

/// Utility values are restricted to {0, 1/2, 1}; stored as a small enum so
/// results stay exactly comparable and serializable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub enum OrderedUtility {
    Loss,
    Tie,
    Win,
}

impl OrderedUtility {
    pub fn value(self) -> f64 {
        match self {
            OrderedUtility::Loss => 0.0,
            OrderedUtility::Tie => 0.5,
            OrderedUtility::Win => 1.0,
        }
    }
}

impl From<OrderedUtility> for f64 {
    fn from(u: OrderedUtility) -> f64 {
        u.value()
    }
}

impl TryFrom<f64> for OrderedUtility {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, String> {
        if v == 0.0 {
            Ok(OrderedUtility::Loss)
        } else if v == 0.5 {
            Ok(OrderedUtility::Tie)
        } else if v == 1.0 {
            Ok(OrderedUtility::Win)
        } else {
            Err(format!("utility {v} is not in {{0, 0.5, 1}}"))
        }
    }
}

/// Pairwise utility: 1 to the guess strictly closer to `p * mu`, a 0.5/0.5
/// split on an exact tie, 0 otherwise, with `mu` the mean of the two
/// guesses. Rejects out-of-range actions.
pub fn utility(a_i: i64, a_j: i64, spec: &GameSpec) -> Result<(f64, f64), GameError> {
    let result = score_pair(a_i, a_j, spec)?;
    Ok((result.utility_i.value(), result.utility_j.value()))
}

/// Full scoring of one guess pair, exposing the exact mean and target.
pub fn score_pair(a_i: i64, a_j: i64, spec: &GameSpec) -> Result<MatchResult, GameError> {
    spec.check_action(a_i)?;
    spec.check_action(a_j)?;
    let mu = Rational::new(a_i + a_j, 2);
    let target = spec.p() * mu;
    let dist_i = (Rational::from_integer(a_i) - target).abs();
    let dist_j = (Rational::from_integer(a_j) - target).abs();
    let (utility_i, utility_j) = match dist_i.cmp(&dist_j) {
        Ordering::Less => (OrderedUtility::Win, OrderedUtility::Loss),
        Ordering::Equal => (OrderedUtility::Tie, OrderedUtility::Tie),
        Ordering::Greater => (OrderedUtility::Loss, OrderedUtility::Win),
    };
    Ok(MatchResult {
        guess_i: a_i,
        guess_j: a_j,
        mu,
        target,
        utility_i,
        utility_j,
    })
}
