//! Two-player one-shot guessing game (p-beauty contest) primitives.
//!
//! A game is the tuple (N, p, A, U): two players, a rational target
//! multiplier `p`, a shared finite integer action range `A`, and a
//! winner-take-most utility that compares each guess against `p` times the
//! mean of the two guesses. All target arithmetic is exact rational so that
//! the tie branch of the utility is decidable.
//!
//! The crate also provides the umpire that pairs two agents for a match,
//! the natural-language description of a game instance, and the inverse
//! translation from a templated description back to the game tuple (used by
//! agents that do not consume natural language).

mod describe;
mod spec;
mod umpire;
mod utility;

pub use describe::{describe_game, translate, translate_text, GameDescription, TranslationError, DESCRIPTION_TEMPLATE_VERSION};
pub use spec::{parse_rational, GameError, GameSpec, Rational};
pub use umpire::{play_match, Agent, AgentMove, FixedGuess, MatchRecord};
pub use utility::{score_pair, utility, MatchResult};
