use crate::describe::{mean, sample_sd, skewness};
use crate::StatError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Levene,
    TEqualVar,
    Welch,
    MannWhitneyU,
    Spearman,
}

/// Outcome of a two-sample comparison (or a correlation test). The kind of
/// test actually run is always recorded alongside the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_kind: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// Set when the inputs admit no meaningful inference (zero variance,
    /// constant ranks); the reported p-value is then a convention.
    pub degenerate: bool,
}

/// Centering choice for the variance-homogeneity test: mean-centered is
/// the classic statistic, median-centered is the Brown-Forsythe variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeveneCenter {
    #[default]
    Mean,
    Median,
}

/// Significance stars as used in the delta heatmap annotations.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn require(len: usize, needed: usize) -> Result<(), StatError> {
    if len < needed {
        Err(StatError::TooFewSamples { needed, got: len })
    } else {
        Ok(())
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-group Levene test for variance homogeneity (mean-centered).
pub fn levene(a: &[f64], b: &[f64]) -> Result<TestResult, StatError> {
    levene_with(a, b, LeveneCenter::Mean)
}

pub fn levene_with(a: &[f64], b: &[f64], center: LeveneCenter) -> Result<TestResult, StatError> {
    require(a.len(), 2)?;
    require(b.len(), 2)?;
    let center_of = |xs: &[f64]| match center {
        LeveneCenter::Mean => mean(xs).expect("len checked"),
        LeveneCenter::Median => median(xs),
    };
    let (ca, cb) = (center_of(a), center_of(b));
    let za: Vec<f64> = a.iter().map(|x| (x - ca).abs()).collect();
    let zb: Vec<f64> = b.iter().map(|x| (x - cb).abs()).collect();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mza = mean(&za)?;
    let mzb = mean(&zb)?;
    let mz = (na * mza + nb * mzb) / n;

    let between = na * (mza - mz).powi(2) + nb * (mzb - mz).powi(2);
    let within: f64 = za.iter().map(|z| (z - mza).powi(2)).sum::<f64>()
        + zb.iter().map(|z| (z - mzb).powi(2)).sum::<f64>();

    if within == 0.0 {
        // No spread in the absolute deviations anywhere: identical-shape
        // degenerate case, conventionally no evidence against homogeneity.
        return Ok(TestResult {
            test_kind: TestKind::Levene,
            statistic: 0.0,
            p_value: 1.0,
            n_a: a.len(),
            n_b: b.len(),
            degenerate: true,
        });
    }

    let w = (n - 2.0) * between / within;
    let f = FisherSnedecor::new(1.0, n - 2.0)
        .map_err(|e| StatError::Degenerate(e.to_string()))?;
    Ok(TestResult {
        test_kind: TestKind::Levene,
        statistic: w,
        p_value: 1.0 - f.cdf(w),
        n_a: a.len(),
        n_b: b.len(),
        degenerate: false,
    })
}

fn t_p_value(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Standard independent-samples t-test (pooled variance).
pub fn t_test_equal_var(a: &[f64], b: &[f64]) -> Result<TestResult, StatError> {
    require(a.len(), 2)?;
    require(b.len(), 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a)?, mean(b)?);
    let (sa, sb) = (sample_sd(a)?, sample_sd(b)?);
    let pooled = (((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0)).sqrt();
    let se = pooled * (1.0 / na + 1.0 / nb).sqrt();
    if se == 0.0 {
        return Ok(degenerate_t(TestKind::TEqualVar, ma, mb, a.len(), b.len()));
    }
    let t = (ma - mb) / se;
    Ok(TestResult {
        test_kind: TestKind::TEqualVar,
        statistic: t,
        p_value: t_p_value(t, na + nb - 2.0),
        n_a: a.len(),
        n_b: b.len(),
        degenerate: false,
    })
}

/// Welch's t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatError> {
    require(a.len(), 2)?;
    require(b.len(), 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a)?, mean(b)?);
    let (va, vb) = (sample_sd(a)?.powi(2), sample_sd(b)?.powi(2));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return Ok(degenerate_t(TestKind::Welch, ma, mb, a.len(), b.len()));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    Ok(TestResult {
        test_kind: TestKind::Welch,
        statistic: t,
        p_value: t_p_value(t, df),
        n_a: a.len(),
        n_b: b.len(),
        degenerate: false,
    })
}

fn degenerate_t(kind: TestKind, ma: f64, mb: f64, na: usize, nb: usize) -> TestResult {
    // Zero variance everywhere: equal means are trivially indistinct,
    // distinct means are trivially separated.
    let identical = ma == mb;
    TestResult {
        test_kind: kind,
        statistic: if identical { 0.0 } else { f64::INFINITY * (ma - mb).signum() },
        p_value: if identical { 1.0 } else { 0.0 },
        n_a: na,
        n_b: nb,
        degenerate: true,
    }
}

/// Average ranks of the pooled sample (1-based, ties share the mean rank).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j + 2) as f64 / 2.0; // mean of ranks i+1..=j+1
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// U statistic of sample `a`: pairwise wins plus half-ties, computed from
/// pooled average ranks.
fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut pooled = a.to_vec();
    pooled.extend_from_slice(b);
    let ranks = average_ranks(&pooled);
    let ra: f64 = ranks[..a.len()].iter().sum();
    ra - (a.len() * (a.len() + 1)) as f64 / 2.0
}

/// Mann-Whitney U test, two-sided. For small samples (both sides at most
/// 8) the p-value is the exact permutation tail of the observed pooled
/// multiset; larger samples use the tie-corrected normal approximation
/// with continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult, StatError> {
    require(a.len(), 1)?;
    require(b.len(), 1)?;
    let u = u_statistic(a, b);
    let (na, nb) = (a.len(), b.len());
    let p = if na <= 8 && nb <= 8 {
        exact_mw_p(a, b, u)
    } else {
        normal_mw_p(a, b, u)
    };
    Ok(TestResult {
        test_kind: TestKind::MannWhitneyU,
        statistic: u,
        p_value: p,
        n_a: na,
        n_b: nb,
        degenerate: false,
    })
}

// Exact two-sided permutation p-value: the share of labelings of the
// pooled multiset whose U is at least as far from the null mean as the
// observed one.
fn exact_mw_p(a: &[f64], b: &[f64], u_obs: f64) -> f64 {
    let mut pooled = a.to_vec();
    pooled.extend_from_slice(b);
    let n = pooled.len();
    let na = a.len();
    let mu = (a.len() * b.len()) as f64 / 2.0;
    let observed_gap = (u_obs - mu).abs();

    let mut extreme = 0u64;
    let mut total = 0u64;
    // Iterate subsets of size na via combination indices.
    let mut idx: Vec<usize> = (0..na).collect();
    loop {
        let group_a: Vec<f64> = idx.iter().map(|&i| pooled[i]).collect();
        let group_b: Vec<f64> = (0..n)
            .filter(|i| !idx.contains(i))
            .map(|i| pooled[i])
            .collect();
        let u = u_statistic(&group_a, &group_b);
        total += 1;
        if (u - mu).abs() >= observed_gap - 1e-12 {
            extreme += 1;
        }
        // Next combination.
        let mut pos = na;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + n - na {
                idx[pos] += 1;
                for later in pos + 1..na {
                    idx[later] = idx[later - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return extreme as f64 / total as f64;
            }
        }
    }
}

// Tie-corrected normal approximation with continuity correction.
fn normal_mw_p(a: &[f64], b: &[f64], u: f64) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mu = na * nb / 2.0;

    let mut pooled = a.to_vec();
    pooled.extend_from_slice(b);
    pooled.sort_by(|x, y| x.total_cmp(y));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1] == pooled[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let sigma2 = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if sigma2 <= 0.0 {
        return 1.0;
    }
    let gap = (u - mu).abs();
    let z = (gap - 0.5).max(0.0) / sigma2.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    2.0 * (1.0 - normal.cdf(z))
}

/// Spearman rank correlation with average-rank tie handling; p-value from
/// the t approximation with n-2 degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult, StatError> {
    if x.len() != y.len() {
        return Err(StatError::LengthMismatch(x.len(), y.len()));
    }
    require(x.len(), 3)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mx = mean(&rx)?;
    let my = mean(&ry)?;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Ok(TestResult {
            test_kind: TestKind::Spearman,
            statistic: f64::NAN,
            p_value: f64::NAN,
            n_a: x.len(),
            n_b: y.len(),
            degenerate: true,
        });
    }
    let rho = cov / (vx * vy).sqrt();
    let n = x.len() as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
        t_p_value(t, n - 2.0)
    };
    Ok(TestResult {
        test_kind: TestKind::Spearman,
        statistic: rho,
        p_value: p,
        n_a: x.len(),
        n_b: y.len(),
        degenerate: false,
    })
}

/// Test-selection rule used for every pairwise comparison: severely skewed
/// data (|skewness| > 2 on either side) goes to Mann-Whitney; otherwise
/// Levene at alpha = 0.05 routes to the pooled t-test (homogeneous) or
/// Welch (heterogeneous). Samples too small or too degenerate for a
/// skewness estimate count as not severely skewed.
pub fn choose_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatError> {
    require(a.len(), 2)?;
    require(b.len(), 2)?;
    let skew_of = |xs: &[f64]| skewness(xs).unwrap_or(0.0);
    if skew_of(a).abs() > 2.0 || skew_of(b).abs() > 2.0 {
        return mann_whitney_u(a, b);
    }
    let variances = levene(a, b)?;
    if variances.p_value < 0.05 {
        welch_t(a, b)
    } else {
        t_test_equal_var(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // ---- Levene ----

    #[test]
    fn levene_on_identical_groups_is_degenerate_only_when_flat() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = levene(&a, &a).unwrap();
        assert!(close(r.statistic, 0.0, 1e-12));
        assert!(close(r.p_value, 1.0, 1e-12));
        assert!(!r.degenerate);

        let flat = [2.0, 2.0, 2.0];
        let r = levene(&flat, &flat).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn levene_matches_scipy_reference() {
        // scipy.stats.levene(a, b, center='mean') on a fixed pair.
        let a = [8.88, 9.12, 9.04, 8.98, 9.00, 9.08, 9.01, 8.85, 9.06, 8.99];
        let b = [8.88, 8.95, 9.29, 9.44, 9.15, 9.58, 8.36, 9.18, 8.67, 9.05];
        let r = levene(&a, &b).unwrap();
        assert!(close(r.statistic, 8.83873787256358, 1e-9), "{}", r.statistic);
        assert!(close(r.p_value, 0.008149720958328811, 1e-9), "{}", r.p_value);
    }

    #[test]
    fn brown_forsythe_variant_centers_on_the_median() {
        let a = [1.0, 2.0, 3.0, 4.0, 100.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mean_centered = levene_with(&a, &b, LeveneCenter::Mean).unwrap();
        let median_centered = levene_with(&a, &b, LeveneCenter::Median).unwrap();
        assert_ne!(mean_centered.statistic, median_centered.statistic);
    }

    // ---- t-tests ----

    #[test]
    fn t_test_on_identical_samples_is_flat() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = t_test_equal_var(&a, &a).unwrap();
        assert!(close(r.statistic, 0.0, 1e-12));
        assert!(close(r.p_value, 1.0, 1e-12));
    }

    #[test]
    fn t_and_welch_match_scipy_reference() {
        let a = [14.0, 15.0, 15.0, 16.0, 13.0, 8.0, 14.0];
        let b = [15.0, 17.0, 14.0, 17.0, 14.0, 8.0];
        // scipy.stats.ttest_ind(a, b)
        let t = t_test_equal_var(&a, &b).unwrap();
        assert!(close(t.statistic, -0.3611347214199722, 1e-12), "{}", t.statistic);
        assert!(close(t.p_value, 0.7248389525872514, 1e-9));
        // scipy.stats.ttest_ind(a, b, equal_var=False)
        let w = welch_t(&a, &b).unwrap();
        assert!(close(w.statistic, -0.35439786363034076, 1e-12), "{}", w.statistic);
        assert!(close(w.p_value, 0.7307342214464859, 1e-9));
    }

    #[test]
    fn zero_variance_t_is_degenerate() {
        let r = t_test_equal_var(&[3.0, 3.0], &[3.0, 3.0]).unwrap();
        assert!(close(r.p_value, 1.0, 0.0));
        assert!(r.degenerate);
        let r = welch_t(&[3.0, 3.0], &[4.0, 4.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.degenerate);
    }

    // ---- Mann-Whitney ----

    #[test]
    fn identical_samples_have_central_u() {
        let a = [5.0, 6.0, 7.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert!(close(r.statistic, 4.5, 1e-12)); // n*m/2
    }

    #[test]
    fn separated_samples_hit_the_extremes() {
        let lo = [1.0, 2.0, 3.0];
        let hi = [10.0, 20.0];
        assert!(close(mann_whitney_u(&lo, &hi).unwrap().statistic, 0.0, 1e-12));
        assert!(close(mann_whitney_u(&hi, &lo).unwrap().statistic, 6.0, 1e-12));
    }

    #[test]
    fn small_sample_p_is_the_exact_permutation_tail() {
        // Disjoint groups of 3 and 3: the most extreme of C(6,3)=20
        // labelings on each side -> two-sided p = 2/20.
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 11.0, 12.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(close(r.p_value, 0.1, 1e-12), "{}", r.p_value);
    }

    #[test]
    fn large_sample_p_uses_the_normal_tail() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 5.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        // scipy.stats.mannwhitneyu(a, b, alternative='two-sided',
        // method='asymptotic')
        assert!(close(r.statistic, 312.5, 1e-9), "{}", r.statistic);
        assert!(close(r.p_value, 0.04274735330571392, 1e-6), "{}", r.p_value);
    }

    // ---- Spearman ----

    #[test]
    fn monotone_pairs_have_unit_correlation() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = [10.0, 20.0, 30.0, 40.0];
        let down = [8.0, 6.0, 4.0, 2.0];
        assert!(close(spearman(&x, &up).unwrap().statistic, 1.0, 1e-12));
        assert!(close(spearman(&x, &down).unwrap().statistic, -1.0, 1e-12));
        assert_eq!(spearman(&x, &up).unwrap().p_value, 0.0);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let r = spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.degenerate);
        assert!(r.statistic.is_nan());
    }

    #[test]
    fn tied_ranks_match_scipy_reference() {
        // scipy.stats.spearmanr([1,2,2,3],[1,2,3,4])
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(close(r.statistic, 0.9486832980505139, 1e-12), "{}", r.statistic);
        assert!(close(r.p_value, 0.05131670194948612, 1e-9), "{}", r.p_value);
    }

    // ---- selection rule ----

    #[test]
    fn symmetric_homogeneous_groups_take_the_pooled_t_path() {
        let a = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
        let b = [11.0, 13.0, 15.0, 17.0, 19.0, 21.0];
        assert_eq!(choose_test(&a, &b).unwrap().test_kind, TestKind::TEqualVar);
    }

    #[test]
    fn heteroscedastic_groups_take_the_welch_path() {
        // Variance ratio far beyond 25:1 with enough samples for Levene to
        // reject homogeneity.
        let tight: Vec<f64> = (0..40).map(|i| 50.0 + 0.01 * i as f64).collect();
        let wide: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 0.0 } else { 100.0 })
            .collect();
        assert_eq!(choose_test(&tight, &wide).unwrap().test_kind, TestKind::Welch);
    }

    #[test]
    fn severe_skew_takes_the_mann_whitney_path() {
        // One huge outlier: adjusted skewness well above 2.
        let skewed = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 400.0];
        let normal = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        assert!(skewness(&skewed).unwrap().abs() > 2.0);
        assert_eq!(
            choose_test(&skewed, &normal).unwrap().test_kind,
            TestKind::MannWhitneyU
        );
    }

    #[test]
    fn stars_follow_the_figure_thresholds() {
        assert_eq!(stars(0.2), "");
        assert_eq!(stars(0.04), "*");
        assert_eq!(stars(0.009), "**");
        assert_eq!(stars(0.0009), "***");
    }
}
