//! Statistics lab for guess distributions.
//!
//! Everything the behavioural-alignment analyses need, implemented
//! directly: descriptive moments, the k-level transform and its derived
//! error metrics (AME and the student/expert delta), exact 1-D Wasserstein
//! distance, Gaussian KDE, the hypothesis tests (Levene, pooled/Welch t,
//! Mann-Whitney U, Spearman) with the skewness-driven selection rule, OLS
//! regression with per-coefficient inference, and the ordinal
//! sophistication score. Distribution CDFs for p-values come from
//! `statrs`; every statistic is computed here.
//!
//! Sample means are accumulated in sorted order, so every derived metric
//! is exactly invariant under permutations of its input - re-analysing
//! shuffled traces reproduces byte-identical numbers.

mod describe;
mod hypothesis;
mod kde;
mod klevel;
mod regression;
mod wasserstein;

pub use describe::{mean, sample_sd, skewness, zero_rate};
pub use hypothesis::{
    choose_test, levene, levene_with, mann_whitney_u, spearman, stars, t_test_equal_var,
    welch_t, LeveneCenter, TestKind, TestResult,
};
pub use kde::{kde, silverman_bandwidth, DensityCurve};
pub use klevel::{
    ame, delta_subpop, k_levels, sophistication_score, to_k_level, KLevel, ZeroHandling,
    ZERO_GUESS_K_CAP,
};
pub use regression::{ols, FitTerm, RegressionFit};
pub use wasserstein::{wasserstein_1d, wasserstein_kde};

use thiserror::Error;

/// Serde adapter for f64 fields that may be NaN/inf (degenerate tests,
/// exact fits): non-finite values serialize as JSON null and read back as
/// NaN instead of failing deserialization.
pub mod nullable_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("empty sample")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("paired inputs differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("k-level transform undefined for negative guess {0}")]
    NegativeGuess(f64),
    #[error("design matrix is rank deficient at column {column} ({name})")]
    RankDeficient { column: usize, name: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}
