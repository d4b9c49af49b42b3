//! Regenerates the committed synthetic fixture at data/human_fixture.csv.
//!
//! The file is frozen in the repository; this is the retained generation
//! script. Running it again must reproduce the committed bytes (the
//! regeneration test asserts that).

use human_data::fixture::{make_fixture, FixtureTargets, FIXTURE_SEED};
use human_data::{summarize, to_csv, CohortSample};

fn main() {
    let targets = FixtureTargets::published();
    let (student, expert) = make_fixture(&targets, FIXTURE_SEED).expect("targets are feasible");
    let csv = to_csv(&student, &expert);

    let out = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/human_fixture.csv");
    std::fs::write(&out, &csv).expect("write fixture");

    let pooled = CohortSample::pooled(&student, &expert);
    for (name, sample) in [("student", &student), ("expert", &expert), ("pooled", &pooled)] {
        let s = summarize(sample);
        println!(
            "{name}: n={} mean={:.3} sd={:.3} skew={:.3} zero_rate={:.3}",
            s.n,
            s.mean,
            s.sd.unwrap_or(f64::NAN),
            s.skewness.unwrap_or(f64::NAN),
            s.zero_rate
        );
    }
    println!("wrote {}", out.display());
}
