use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational scalar used for the multiplier and all target arithmetic.
pub type Rational = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid action range: low {low} must be strictly below high {high}")]
    InvalidRange { low: i64, high: i64 },
    #[error("multiplier {0} outside the supported open interval (0, 1)")]
    InvalidMultiplier(String),
    #[error("action {action} outside the valid range [{low}, {high}]")]
    ActionOutOfRange { action: i64, low: i64, high: i64 },
}

/// The game tuple: two players, multiplier `p`, shared integer action
/// range `{low, ..., high}` and the implied utility function.
/// Deserialization re-validates, so hand-edited manifests cannot smuggle
/// in a degenerate range or multiplier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGameSpec")]
pub struct GameSpec {
    #[serde(with = "rational_string")]
    p: Rational,
    low: i64,
    high: i64,
}

#[derive(Deserialize)]
struct RawGameSpec {
    #[serde(with = "rational_string")]
    p: Rational,
    low: i64,
    high: i64,
}

impl TryFrom<RawGameSpec> for GameSpec {
    type Error = String;

    fn try_from(raw: RawGameSpec) -> Result<Self, String> {
        GameSpec::new(raw.p, raw.low, raw.high).map_err(|e| e.to_string())
    }
}

impl GameSpec {
    /// Number of players is fixed; the one-shot game is strictly pairwise.
    pub const N_PLAYERS: usize = 2;

    pub fn new(p: Rational, low: i64, high: i64) -> Result<Self, GameError> {
        if low >= high {
            return Err(GameError::InvalidRange { low, high });
        }
        if p <= Rational::zero() || p >= Rational::new(1, 1) {
            return Err(GameError::InvalidMultiplier(p.to_string()));
        }
        Ok(Self { p, low, high })
    }

    /// The standard two-thirds game over `[0, 100]`.
    pub fn two_thirds_standard() -> Self {
        Self::new(Rational::new(2, 3), 0, 100).expect("standard spec is valid")
    }

    /// The shifted-range variant over `[100, 200]` used for
    /// out-of-sample validation.
    pub fn two_thirds_shifted() -> Self {
        Self::new(Rational::new(2, 3), 100, 200).expect("shifted spec is valid")
    }

    pub fn p(&self) -> Rational {
        self.p
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.high
    }

    /// All actions, lowest first.
    pub fn actions(&self) -> impl Iterator<Item = i64> {
        self.low..=self.high
    }

    /// |A|: number of available strategies.
    pub fn n_actions(&self) -> usize {
        (self.high - self.low + 1) as usize
    }

    pub fn contains(&self, action: i64) -> bool {
        action >= self.low && action <= self.high
    }

    pub fn check_action(&self, action: i64) -> Result<(), GameError> {
        if self.contains(action) {
            Ok(())
        } else {
            Err(GameError::ActionOutOfRange {
                action,
                low: self.low,
                high: self.high,
            })
        }
    }

    /// Exact midpoint of the range, the level-0 anchor of the k-level ladder.
    pub fn midpoint(&self) -> Rational {
        Rational::new(self.low + self.high, 2)
    }

    /// Zero-based index of an in-range action into dense per-action vectors.
    pub fn index_of(&self, action: i64) -> usize {
        debug_assert!(self.contains(action));
        (action - self.low) as usize
    }

    pub fn action_at(&self, index: usize) -> i64 {
        self.low + index as i64
    }
}

/// Serializes rationals as `"num/den"` so specs stay readable in configs,
/// traces and manifests.
pub(crate) mod rational_string {
    use super::Rational;
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format!("{}/{}", value.numer(), value.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(de)?;
        parse_rational(&raw).map_err(D::Error::custom)
    }

    pub fn parse_rational(raw: &str) -> Result<Rational, String> {
        let raw = raw.trim();
        let (num, den) = match raw.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (raw, "1"),
        };
        let num: i64 = num
            .parse()
            .map_err(|_| format!("bad rational numerator in {raw:?}"))?;
        let den: i64 = den
            .parse()
            .map_err(|_| format!("bad rational denominator in {raw:?}"))?;
        if den == 0 {
            return Err(format!("zero denominator in {raw:?}"));
        }
        Ok(Rational::new(num, den))
    }
}

/// Parse a `"2/3"`-style rational, as accepted in experiment configs.
pub fn parse_rational(raw: &str) -> Result<Rational, String> {
    rational_string::parse_rational(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_range() {
        assert!(matches!(
            GameSpec::new(Rational::new(2, 3), 10, 10),
            Err(GameError::InvalidRange { .. })
        ));
        assert!(GameSpec::new(Rational::new(2, 3), 10, 5).is_err());
    }

    #[test]
    fn rejects_multiplier_outside_unit_interval() {
        assert!(GameSpec::new(Rational::new(1, 1), 0, 100).is_err());
        assert!(GameSpec::new(Rational::new(0, 1), 0, 100).is_err());
        assert!(GameSpec::new(Rational::new(-1, 3), 0, 100).is_err());
        assert!(GameSpec::new(Rational::new(2, 3), 0, 100).is_ok());
    }

    #[test]
    fn action_indexing_round_trips() {
        let spec = GameSpec::two_thirds_shifted();
        assert_eq!(spec.n_actions(), 101);
        assert_eq!(spec.index_of(100), 0);
        assert_eq!(spec.action_at(100), 200);
        assert!(spec.contains(150));
        assert!(!spec.contains(99));
    }

    #[test]
    fn spec_serializes_with_readable_multiplier() {
        let spec = GameSpec::two_thirds_standard();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"2/3\""), "{json}");
        let back: GameSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn deserialization_revalidates() {
        let bad = r#"{"p":"2/3","low":50,"high":10}"#;
        assert!(serde_json::from_str::<GameSpec>(bad).is_err());
        let bad_p = r#"{"p":"5/3","low":0,"high":100}"#;
        assert!(serde_json::from_str::<GameSpec>(bad_p).is_err());
    }
}
