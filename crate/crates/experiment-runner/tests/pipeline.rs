//! Pipeline invariants beyond the acceptance gate: interrupted runs resume
//! to the same bytes, and analysis results do not depend on trace order.

use experiment_runner::analyze::{analyze, read_json, CellMetrics};
use experiment_runner::config::{load_config, AnalysisFlags, WassersteinVariant};
use experiment_runner::simulate::simulate;
use stat_lab::ZeroHandling;
use std::path::{Path, PathBuf};

fn fixture_csv() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/human_fixture.csv")
}

fn small_matrix_toml() -> &'static str {
    r#"
seed = 1337
samples_per_cell = 30

[game]
p = "2/3"
low = 0
high = 100

[agents]
lattice = true
models = [ { id = "haiku", ordinal = 0 }, { id = "sonnet", ordinal = 1 } ]

[backend]
kind = "stub"
[backend.stub]
[backend.stub.default]
mode = "formula"
a = 19
b = 3
c = 8
"#
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, small_matrix_toml()).unwrap();
    path
}

#[test]
fn interrupted_runs_resume_to_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let experiment = load_config(&write_config(tmp.path())).unwrap();

    let full = tmp.path().join("full");
    simulate(&experiment, &full, false).unwrap();

    // Fake an interruption: no manifest, one cell missing, one cell with a
    // truncated tail line, one cell with only a prefix.
    let partial = tmp.path().join("partial");
    std::fs::create_dir_all(partial.join("traces")).unwrap();
    for entry in std::fs::read_dir(full.join("traces")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), partial.join("traces").join(entry.file_name())).unwrap();
    }
    std::fs::remove_file(partial.join("traces/r_sonnet_cbio_m1.jsonl")).unwrap();
    let victim = partial.join("traces/s_haiku_cnone_m0.jsonl");
    let bytes = std::fs::read(&victim).unwrap();
    std::fs::write(&victim, &bytes[..bytes.len() / 2]).unwrap();
    let prefix_victim = partial.join("traces/ewa.jsonl");
    let text = std::fs::read_to_string(&prefix_victim).unwrap();
    let prefix: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
    std::fs::write(&prefix_victim, prefix).unwrap();

    simulate(&experiment, &partial, true).unwrap();

    for entry in std::fs::read_dir(full.join("traces")).unwrap() {
        let entry = entry.unwrap();
        let a = std::fs::read(entry.path()).unwrap();
        let b = std::fs::read(partial.join("traces").join(entry.file_name())).unwrap();
        assert_eq!(a, b, "cell {:?} differs after resume", entry.file_name());
    }
    let a = std::fs::read(full.join("matches.jsonl")).unwrap();
    let b = std::fs::read(partial.join("matches.jsonl")).unwrap();
    assert_eq!(a, b, "match records differ after resume");
}

#[test]
fn resume_recomputes_traces_from_a_different_config() {
    let tmp = tempfile::tempdir().unwrap();
    let experiment_a = load_config(&write_config(tmp.path())).unwrap();
    let stale = tmp.path().join("stale");
    simulate(&experiment_a, &stale, false).unwrap();
    std::fs::remove_file(stale.join("manifest.json")).unwrap();

    // Same layout, different seed: every stale episode must be replaced.
    let other_cfg = tmp.path().join("other.toml");
    std::fs::write(&other_cfg, small_matrix_toml().replace("seed = 1337", "seed = 9999")).unwrap();
    let experiment_b = load_config(&other_cfg).unwrap();
    simulate(&experiment_b, &stale, true).unwrap();

    let fresh = tmp.path().join("fresh");
    simulate(&experiment_b, &fresh, false).unwrap();
    for entry in std::fs::read_dir(fresh.join("traces")).unwrap() {
        let entry = entry.unwrap();
        let a = std::fs::read(entry.path()).unwrap();
        let b = std::fs::read(stale.join("traces").join(entry.file_name())).unwrap();
        assert_eq!(a, b, "stale episodes leaked into {:?}", entry.file_name());
    }
}

#[test]
fn refuses_to_clobber_and_resumes_completed_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let experiment = load_config(&write_config(tmp.path())).unwrap();
    let run = tmp.path().join("run");
    simulate(&experiment, &run, false).unwrap();

    // Completed: plain re-run refuses, --resume is a no-op.
    assert!(simulate(&experiment, &run, false).is_err());
    let again = simulate(&experiment, &run, true).unwrap();
    assert_eq!(again.cells.len(), 25);
}

#[test]
fn analysis_flag_variants_change_the_advertised_routes() {
    let tmp = tempfile::tempdir().unwrap();
    let experiment = load_config(&write_config(tmp.path())).unwrap();
    let run = tmp.path().join("run");
    simulate(&experiment, &run, false).unwrap();

    let default_metrics = tmp.path().join("metrics_default");
    analyze(&run, &fixture_csv(), &default_metrics, None).unwrap();
    let default_cells: Vec<CellMetrics> = read_json(&default_metrics, "cells.json").unwrap();
    assert!(default_cells.iter().all(|c| c.wasserstein_kde.is_none()));

    let variant_metrics = tmp.path().join("metrics_variant");
    let flags = AnalysisFlags {
        wasserstein: WassersteinVariant::Kde,
        zero_k: ZeroHandling::Exclude,
        ..AnalysisFlags::default()
    };
    analyze(&run, &fixture_csv(), &variant_metrics, Some(flags)).unwrap();
    let variant_cells: Vec<CellMetrics> = read_json(&variant_metrics, "cells.json").unwrap();

    let mut some_kde = false;
    let mut some_k_shift = false;
    for (d, v) in default_cells.iter().zip(&variant_cells) {
        assert_eq!(d.cell_id, v.cell_id);
        if v.wasserstein_kde.is_some() {
            some_kde = true;
            // The smoothed route differs from the exact quantile route.
            assert_ne!(v.wasserstein_kde, v.wasserstein);
        }
        if let (Some(dk), Some(vk)) = (d.mean_k, v.mean_k) {
            // Excluding zeros drops the capped k(1) mass, lowering the mean
            // k of any cell that produced zero guesses.
            if d.zeros_per_100 > 0.0 && dk != vk {
                some_k_shift = true;
                assert!(vk < dk, "{}: exclude should lower mean k", d.cell_id);
            }
        }
    }
    assert!(some_kde, "kde variant column never populated");
    assert!(some_k_shift, "zero handling had no observable effect");
}

#[test]
fn cells_over_the_failure_budget_are_flagged_not_thinned() {
    let tmp = tempfile::tempdir().unwrap();
    // A constant out-of-range stub: every LLM episode parses but fails the
    // range check, so all 24 LLM cells blow the 20% budget.
    let toml_text = r#"
seed = 5
samples_per_cell = 20

[game]
p = "2/3"
low = 0
high = 100

[agents]
lattice = true
models = [ { id = "haiku", ordinal = 0 }, { id = "sonnet", ordinal = 1 } ]

[backend]
kind = "stub"
[backend.stub]
[backend.stub.default]
mode = "constant"
value = 242
"#;
    let config_path = tmp.path().join("broken.toml");
    std::fs::write(&config_path, toml_text).unwrap();
    let experiment = load_config(&config_path).unwrap();
    let run = tmp.path().join("run");
    simulate(&experiment, &run, false).unwrap();
    let metrics = tmp.path().join("metrics");
    analyze(&run, &fixture_csv(), &metrics, None).unwrap();

    let gaps: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(metrics.join("gaps.json")).unwrap())
            .unwrap();
    // With zero valid guesses the cells land in the empty bucket; either
    // way they are reported, not silently dropped from the metrics.
    let reported = gaps["flagged_cells"].as_array().unwrap().len()
        + gaps["empty_cells"].as_array().unwrap().len();
    assert_eq!(reported, 24, "{gaps}");

    let cells: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(metrics.join("cells.json")).unwrap())
            .unwrap();
    for cell in cells.as_array().unwrap() {
        if cell["agent_kind"] == "ewa" {
            assert_eq!(cell["flagged"], false);
            continue;
        }
        assert_eq!(cell["flagged"], true, "{cell}");
        assert!(cell["ame"].is_null(), "flagged cells get no distribution metrics");
        assert_eq!(cell["validity_ratio"], 0.0);
    }
}

#[test]
fn analysis_is_independent_of_trace_order() {
    let tmp = tempfile::tempdir().unwrap();
    let experiment = load_config(&write_config(tmp.path())).unwrap();
    let run = tmp.path().join("run");
    simulate(&experiment, &run, false).unwrap();

    let metrics_a = tmp.path().join("metrics_a");
    analyze(&run, &fixture_csv(), &metrics_a, None).unwrap();

    // Permute every trace file's line order (manifest untouched).
    for entry in std::fs::read_dir(run.join("traces")).unwrap() {
        let entry = entry.unwrap();
        let text = std::fs::read_to_string(entry.path()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.reverse();
        if lines.len() > 3 {
            lines.swap(0, 2);
        }
        let mut permuted = lines.join("\n");
        permuted.push('\n');
        std::fs::write(entry.path(), permuted).unwrap();
    }

    let metrics_b = tmp.path().join("metrics_b");
    analyze(&run, &fixture_csv(), &metrics_b, None).unwrap();

    for name in [
        "cells.json",
        "cohort_cells.json",
        "delta.json",
        "regressions.json",
        "tokens.json",
        "kde_curves.json",
        "ewa_calibration.json",
        "human.json",
    ] {
        let a = std::fs::read(metrics_a.join(name)).unwrap();
        let b = std::fs::read(metrics_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} depends on trace order");
    }
}
