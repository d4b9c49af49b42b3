use crate::spec::{GameSpec, Rational};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Version tag of the natural-language game template. Recorded with every
/// trace so produced guesses stay attributable to a prompt wording.
pub const DESCRIPTION_TEMPLATE_VERSION: &str = "v1";

/// A rendered natural-language game description plus the spec it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDescription {
    pub text: String,
    pub spec: GameSpec,
    pub template_version: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum TranslationError {
    #[error("description does not match template {version}: could not locate {fragment}")]
    UnrecognizedTemplate {
        version: &'static str,
        fragment: &'static str,
    },
    #[error("description states an invalid game: {0}")]
    InvalidGame(String),
}

// Named multiplier phrasings; anything else renders as "num/den".
const NAMED_FRACTIONS: &[(i64, i64, &str)] = &[
    (1, 2, "one-half"),
    (1, 3, "one-third"),
    (2, 3, "two-thirds"),
    (3, 4, "three-quarters"),
];

fn multiplier_phrase(p: Rational) -> String {
    for &(n, d, name) in NAMED_FRACTIONS {
        if p == Rational::new(n, d) {
            return name.to_string();
        }
    }
    format!("{}/{}", p.numer(), p.denom())
}

fn phrase_to_multiplier(phrase: &str) -> Option<Rational> {
    for &(n, d, name) in NAMED_FRACTIONS {
        if phrase == name {
            return Some(Rational::new(n, d));
        }
    }
    let (n, d) = phrase.split_once('/')?;
    Some(Rational::new(n.parse().ok()?, d.parse().ok()?))
}

/// Render the deterministic template for a game instance: players, the
/// shared integer range, the target rule, and the explicit tie rule.
pub fn describe_game(spec: &GameSpec) -> GameDescription {
    let text = format!(
        "You are playing a one-shot guessing game against one other player. \
         Each of you independently picks an integer between {low} and {high}, inclusive, \
         without seeing the other player's number. Once both numbers are revealed, \
         a target is computed as {p} of the average of the two numbers. \
         The player whose number is closer to the target wins. \
         If both numbers are equally close to the target, the game is a tie and the prize is split.",
        low = spec.low(),
        high = spec.high(),
        p = multiplier_phrase(spec.p()),
    );
    GameDescription {
        text,
        spec: spec.clone(),
        template_version: DESCRIPTION_TEMPLATE_VERSION.to_string(),
    }
}

fn range_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"picks an integer between (-?\d+) and (-?\d+), inclusive").unwrap()
    })
}

fn multiplier_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"computed as ([a-z\-]+|\d+/\d+) of the average").unwrap()
    })
}

/// Recover the game tuple from a templated description text. Exact inverse
/// of [`describe_game`] on template output; anything off-template is an
/// error naming the fragment that failed to match.
pub fn translate_text(text: &str) -> Result<GameSpec, TranslationError> {
    let range = range_regex().captures(text).ok_or(TranslationError::UnrecognizedTemplate {
        version: DESCRIPTION_TEMPLATE_VERSION,
        fragment: "the action range sentence (\"picks an integer between L and H, inclusive\")",
    })?;
    let low: i64 = range[1].parse().map_err(|_| TranslationError::UnrecognizedTemplate {
        version: DESCRIPTION_TEMPLATE_VERSION,
        fragment: "an integer lower bound",
    })?;
    let high: i64 = range[2].parse().map_err(|_| TranslationError::UnrecognizedTemplate {
        version: DESCRIPTION_TEMPLATE_VERSION,
        fragment: "an integer upper bound",
    })?;

    let mult = multiplier_regex().captures(text).ok_or(TranslationError::UnrecognizedTemplate {
        version: DESCRIPTION_TEMPLATE_VERSION,
        fragment: "the target sentence (\"computed as P of the average\")",
    })?;
    let p = phrase_to_multiplier(&mult[1]).ok_or(TranslationError::UnrecognizedTemplate {
        version: DESCRIPTION_TEMPLATE_VERSION,
        fragment: "a known multiplier phrase",
    })?;

    GameSpec::new(p, low, high).map_err(|e| TranslationError::InvalidGame(e.to_string()))
}

/// The translation function for non-linguistic agents: description -> tuple.
pub fn translate(description: &GameDescription) -> Result<GameSpec, TranslationError> {
    translate_text(&description.text)
}
