use crate::backend::{GenerationSettings, HttpExchange};
use crate::config::AgentConfig;
use game_core::GameSpec;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Why a response yielded no usable guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidKind {
    /// No integer anywhere in the response.
    NoNumber,
    /// An integer was found but lies outside the action range.
    OutOfRange,
    /// Conflicting answer-marker lines.
    Ambiguous,
}

/// Full record of one episode: every prompt and raw response, the parsed
/// guess (if any), token accounting and the template/seed provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub schema_version: u32,
    pub cell_id: String,
    pub episode: u32,
    pub config: AgentConfig,
    pub prompts: Vec<String>,
    pub responses: Vec<String>,
    /// The opponent belief elicited by Reasoner call 1.
    pub belief: Option<String>,
    pub guess: Option<i64>,
    pub valid: bool,
    pub invalid_kind: Option<InvalidKind>,
    /// Transport-level failure after retries, if the episode died early.
    pub failure: Option<String>,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub tokens_approximate: bool,
    pub template_version: String,
    pub seed: u64,
    pub generation: GenerationSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub http_exchanges: Option<Vec<HttpExchange>>,
}

fn marker_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)FINAL ANSWER:\s*(-?\d+)").unwrap())
}

/// Extract a guess from a raw response.
///
/// Priority: (1) answer-marker occurrences ("FINAL ANSWER: <int>"); all
/// occurrences must agree, otherwise the response is ambiguous. (2) The
/// last standalone integer in the text (digit runs that are part of a
/// decimal number don't count). The result is range-checked. Total: every
/// string maps to a guess or a classified failure, never a panic.
pub fn parse_guess(text: &str, spec: &GameSpec) -> Result<i64, InvalidKind> {
    let mut marker_values: Vec<i64> = Vec::new();
    for cap in marker_regex().captures_iter(text) {
        if let Ok(v) = cap[1].parse::<i64>() {
            marker_values.push(v);
        }
    }
    marker_values.dedup();
    let candidate = match marker_values.len() {
        0 => last_standalone_integer(text).ok_or(InvalidKind::NoNumber)?,
        1 => marker_values[0],
        _ => {
            if marker_values.iter().all(|v| *v == marker_values[0]) {
                marker_values[0]
            } else {
                return Err(InvalidKind::Ambiguous);
            }
        }
    };
    if spec.contains(candidate) {
        Ok(candidate)
    } else {
        Err(InvalidKind::OutOfRange)
    }
}

fn last_standalone_integer(text: &str) -> Option<i64> {
    let bytes = text.as_bytes();
    let mut result = None;
    for m in integer_regex().find_iter(text) {
        let before = m.start().checked_sub(1).map(|i| bytes[i] as char);
        let after = bytes.get(m.end()).map(|b| *b as char);
        // Skip digit runs glued to decimal points ("33.5" yields neither 33
        // nor 5); adjacent digits are impossible given a maximal match.
        if before == Some('.') || after == Some('.') {
            continue;
        }
        if let Ok(v) = m.as_str().parse::<i64>() {
            result = Some(v);
        }
    }
    result
}

fn integer_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-?\d+").unwrap())
}

/// Token usage of an episode, either backend-reported or approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCount {
    pub tokens_in: u64,
    pub tokens_out: u64,
    /// True when any side was approximated instead of backend-reported.
    pub approximate: bool,
}

/// Aggregate token usage for an episode. Backend-reported numbers are used
/// when every call reported them; otherwise both sides are recounted with
/// the whitespace/punctuation approximation and flagged approximate.
pub fn count_tokens(
    prompts: &[String],
    responses: &[String],
    reported: &[Option<(u64, u64)>],
) -> TokenCount {
    let complete = !reported.is_empty() && reported.iter().all(|r| r.is_some());
    if complete {
        let mut tokens_in = 0;
        let mut tokens_out = 0;
        for r in reported.iter().flatten() {
            tokens_in += r.0;
            tokens_out += r.1;
        }
        TokenCount {
            tokens_in,
            tokens_out,
            approximate: false,
        }
    } else {
        TokenCount {
            tokens_in: prompts.iter().map(|p| approx_tokens(p)).sum(),
            tokens_out: responses.iter().map(|r| approx_tokens(r)).sum(),
            approximate: true,
        }
    }
}

/// Crude deterministic token estimate: each maximal alphanumeric run
/// counts once, each other non-whitespace character counts once.
pub fn approx_tokens(text: &str) -> u64 {
    let mut count = 0u64;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GameSpec {
        GameSpec::two_thirds_standard()
    }

    #[test]
    fn marker_line_wins() {
        assert_eq!(parse_guess("thinking... FINAL ANSWER: 22", &spec()), Ok(22));
        assert_eq!(parse_guess("final answer: 41", &spec()), Ok(41));
    }

    #[test]
    fn falls_back_to_the_last_standalone_integer() {
        assert_eq!(parse_guess("maybe 50, but I'll say 33", &spec()), Ok(33));
    }

    #[test]
    fn decimal_fragments_are_not_integers() {
        assert_eq!(
            parse_guess("the mean would be 33.5 I think", &spec()),
            Err(InvalidKind::NoNumber)
        );
        assert_eq!(parse_guess("expecting 33.5, so 22", &spec()), Ok(22));
    }

    #[test]
    fn out_of_range_is_classified() {
        let shifted = GameSpec::two_thirds_shifted();
        assert_eq!(parse_guess("42", &shifted), Err(InvalidKind::OutOfRange));
        assert_eq!(parse_guess("FINAL ANSWER: 150", &spec()), Err(InvalidKind::OutOfRange));
    }

    #[test]
    fn prose_without_numbers_is_no_number() {
        assert_eq!(
            parse_guess("I would rather not say.", &spec()),
            Err(InvalidKind::NoNumber)
        );
        assert_eq!(parse_guess("", &spec()), Err(InvalidKind::NoNumber));
    }

    #[test]
    fn conflicting_markers_are_ambiguous() {
        let text = "FINAL ANSWER: 10\nno wait\nFINAL ANSWER: 20";
        assert_eq!(parse_guess(text, &spec()), Err(InvalidKind::Ambiguous));
        let agreeing = "FINAL ANSWER: 10\nyes\nFINAL ANSWER: 10";
        assert_eq!(parse_guess(agreeing, &spec()), Ok(10));
    }

    #[test]
    fn reported_usage_is_preferred() {
        let counted = count_tokens(
            &["a b".into()],
            &["c d e".into()],
            &[Some((120, 340))],
        );
        assert_eq!(counted.tokens_in, 120);
        assert_eq!(counted.tokens_out, 340);
        assert!(!counted.approximate);
    }

    #[test]
    fn missing_usage_falls_back_to_the_approximation() {
        let counted = count_tokens(
            &["hello, world".into()],
            &[String::new()],
            &[None],
        );
        // "hello" + "," + "world"
        assert_eq!(counted.tokens_in, 3);
        assert_eq!(counted.tokens_out, 0);
        assert!(counted.approximate);
    }

    #[test]
    fn approx_token_golden_counts() {
        assert_eq!(approx_tokens(""), 0);
        assert_eq!(approx_tokens("one two three"), 3);
        assert_eq!(approx_tokens("I considered the game.\nFINAL ANSWER: 33"), 9);
    }
}
