//! The committed fixture must stay regenerable bit-for-bit and keep the
//! qualitative cohort pattern: homogeneous variances, significantly
//! different means, expert cohort more zero-heavy and more skewed.

use game_core::GameSpec;
use human_data::fixture::{make_fixture_csv, FixtureTargets, FIXTURE_RELATIVE_TOL, FIXTURE_SEED};
use human_data::{load_human_csv, summarize, CohortSample};
use stat_lab::{levene, t_test_equal_var};
use std::path::PathBuf;

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/human_fixture.csv")
}

#[test]
fn committed_file_matches_the_generator_bytes() {
    let regenerated = make_fixture_csv(&FixtureTargets::published(), FIXTURE_SEED).unwrap();
    let committed = std::fs::read_to_string(fixture_path()).unwrap();
    assert_eq!(regenerated, committed, "data/human_fixture.csv has drifted");
}

#[test]
fn committed_fixture_reproduces_the_published_pattern() {
    let spec = GameSpec::two_thirds_standard();
    let (student, expert) = load_human_csv(fixture_path(), &spec).unwrap();
    let targets = FixtureTargets::published();

    for (sample, t) in [(&student, &targets.student), (&expert, &targets.expert)] {
        let s = summarize(sample);
        assert!((s.mean - t.mean).abs() / t.mean <= FIXTURE_RELATIVE_TOL);
        assert!((s.sd.unwrap() - t.sd).abs() / t.sd <= FIXTURE_RELATIVE_TOL);
        assert!((s.zero_rate - t.zero_rate).abs() / t.zero_rate <= FIXTURE_RELATIVE_TOL);
    }

    // Pooled anchors.
    let pooled = CohortSample::pooled(&student, &expert);
    let p = summarize(&pooled);
    assert_eq!(p.n, 200);
    assert!((p.mean - 29.05).abs() / 29.05 <= FIXTURE_RELATIVE_TOL, "{}", p.mean);
    assert!((p.sd.unwrap() - 28.28).abs() / 28.28 <= FIXTURE_RELATIVE_TOL);

    // Qualitative cohort pattern.
    let s_student = summarize(&student);
    let s_expert = summarize(&expert);
    assert!(s_expert.mean < s_student.mean, "experts guess lower");
    assert!(s_expert.zero_rate > 3.0 * s_student.zero_rate - 0.1);
    assert!(s_expert.skewness.unwrap() > s_student.skewness.unwrap());
    assert!(s_student.skewness.unwrap() > 0.0);

    // Same test route as the published analysis: variances homogeneous,
    // means significantly different under the pooled t-test.
    let lev = levene(&student.as_f64(), &expert.as_f64()).unwrap();
    assert!(lev.p_value > 0.05, "Levene p = {}", lev.p_value);
    let t = t_test_equal_var(&student.as_f64(), &expert.as_f64()).unwrap();
    assert!(t.p_value < 0.05, "t p = {}", t.p_value);
    assert!(t.statistic > 0.0);
}

#[test]
fn expert_density_concentrates_over_low_guesses() {
    let spec = GameSpec::two_thirds_standard();
    let (student, expert) = load_human_csv(fixture_path(), &spec).unwrap();
    let mass_below_20 = |sample: &CohortSample| -> f64 {
        let curve = stat_lab::kde(&sample.as_f64(), 0.0, 100.0, 501, None).unwrap();
        let dx = curve.xs[1] - curve.xs[0];
        curve
            .xs
            .iter()
            .zip(&curve.ys)
            .filter(|(x, _)| **x < 20.0)
            .map(|(_, y)| y * dx)
            .sum()
    };
    assert!(
        mass_below_20(&expert) > mass_below_20(&student),
        "expert KDE must carry more mass below 20"
    );
}
