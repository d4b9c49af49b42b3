use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use experiment_runner::analyze::analyze;
use experiment_runner::config::{load_config, AnalysisFlags, WassersteinVariant};
use experiment_runner::oos::run_oos;
use experiment_runner::report::report;
use experiment_runner::simulate::simulate;
use stat_lab::{LeveneCenter, ZeroHandling};
use std::path::PathBuf;

/// Two-player guessing-game experiment lab: simulate agent matrices,
/// analyze them against human cohorts, validate out of sample, and render
/// the result tables and figures.
#[derive(Parser)]
#[command(name = "pbeauty", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured agent matrix and write traces + manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output run directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Complete a previously interrupted run.
        #[arg(long)]
        resume: bool,
    },
    /// Compute every alignment metric from a finished run.
    Analyze {
        #[arg(long)]
        traces: PathBuf,
        /// Human cohort CSV (cohort,guess).
        #[arg(long)]
        human: PathBuf,
        /// Metrics output directory (defaults to <traces>/metrics).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Shifted-range out-of-sample treatment against a baseline run.
    Oos {
        /// Config of the shifted-range experiment.
        #[arg(long)]
        config: PathBuf,
        /// Run directory of the baseline (standard-range) simulation.
        #[arg(long)]
        baseline: PathBuf,
        /// Run directory for the shifted simulation (defaults to the
        /// config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metrics output directory (defaults to <baseline>/metrics).
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
    },
    /// Render rounded tables (CSV+JSON) and SVG figures from metrics.
    Report {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also render the SVG figures.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Args)]
struct FlagArgs {
    /// Wasserstein route: raw sample quantiles (exact) or the KDE grid.
    #[arg(long, value_parser = parse_wasserstein)]
    wasserstein: Option<WassersteinVariant>,
    /// Levene centering: mean (classic) or median.
    #[arg(long, value_parser = parse_levene)]
    levene: Option<LeveneCenter>,
    /// Zero-guess handling on the k scale: cap or exclude.
    #[arg(long = "zero-k", value_parser = parse_zero)]
    zero_k: Option<ZeroHandling>,
}

fn parse_wasserstein(s: &str) -> Result<WassersteinVariant, String> {
    match s {
        "raw" => Ok(WassersteinVariant::Raw),
        "kde" => Ok(WassersteinVariant::Kde),
        other => Err(format!("unknown wasserstein variant {other:?} (raw|kde)")),
    }
}

fn parse_levene(s: &str) -> Result<LeveneCenter, String> {
    match s {
        "mean" => Ok(LeveneCenter::Mean),
        "median" => Ok(LeveneCenter::Median),
        other => Err(format!("unknown levene center {other:?} (mean|median)")),
    }
}

fn parse_zero(s: &str) -> Result<ZeroHandling, String> {
    match s {
        "cap" => Ok(ZeroHandling::Cap),
        "exclude" => Ok(ZeroHandling::Exclude),
        other => Err(format!("unknown zero handling {other:?} (cap|exclude)")),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            out,
            resume,
        } => {
            let experiment = load_config(&config)?;
            let run_dir = resolve_out(out, &experiment.output_dir, &config, "run")?;
            let manifest = simulate(&experiment, &run_dir, resume)?;
            let episodes: u32 = manifest.cells.iter().map(|c| c.episodes).sum();
            let valid: u32 = manifest.cells.iter().map(|c| c.valid).sum();
            println!(
                "simulated {} cells, {episodes} episodes ({valid} valid) -> {}",
                manifest.cells.len(),
                run_dir.display()
            );
        }
        Command::Analyze {
            traces,
            human,
            out,
            flags,
        } => {
            let out_dir = out.unwrap_or_else(|| traces.join("metrics"));
            let overrides = build_flags(&traces, flags)?;
            analyze(&traces, &human, &out_dir, overrides)?;
            println!("metrics written to {}", out_dir.display());
        }
        Command::Oos {
            config,
            baseline,
            out,
            metrics,
            resume,
        } => {
            let experiment = load_config(&config)?;
            let run_dir = resolve_out(out, &experiment.output_dir, &config, "oos-run")?;
            let metrics_dir = metrics.unwrap_or_else(|| baseline.join("metrics"));
            run_oos(&experiment, &run_dir, &baseline, &metrics_dir, resume)?;
            println!(
                "out-of-sample comparison written to {}",
                metrics_dir.display()
            );
        }
        Command::Report { metrics, out, svg } => {
            report(&metrics, &out, svg)?;
            println!("report written to {}", out.display());
        }
    }
    Ok(())
}

fn resolve_out(
    cli_out: Option<PathBuf>,
    config_out: &Option<String>,
    config_path: &std::path::Path,
    kind: &str,
) -> Result<PathBuf> {
    if let Some(out) = cli_out {
        return Ok(out);
    }
    if let Some(out) = config_out {
        let base = config_path.parent().unwrap_or_else(|| std::path::Path::new("."));
        return Ok(base.join(out));
    }
    bail!("no output directory: pass --out or set output_dir in the config ({kind})");
}

fn build_flags(traces: &std::path::Path, args: FlagArgs) -> Result<Option<AnalysisFlags>> {
    if args.wasserstein.is_none() && args.levene.is_none() && args.zero_k.is_none() {
        return Ok(None);
    }
    let manifest = experiment_runner::traces::read_manifest(traces)
        .context("reading manifest for flag defaults")?;
    let mut flags = manifest.analysis;
    if let Some(w) = args.wasserstein {
        flags.wasserstein = w;
    }
    if let Some(l) = args.levene {
        flags.levene = l;
    }
    if let Some(z) = args.zero_k {
        flags.zero_k = z;
    }
    Ok(Some(flags))
}
