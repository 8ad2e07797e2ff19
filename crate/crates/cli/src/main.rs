#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dpilot_core::analysis::capacity_curves;
use dpilot_core::harness::{
    advisories, render_results, render_table, run_rate_sweep, run_selftest, run_sweep_with_jobs,
    write_manifest, LinkConfig, OutputFormat, RunManifest,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dpilot",
    version,
    about = "Decoder-provided pilot link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep of every policy over the Eb/N0 grid.
    Sweep(SweepArgs),
    /// State-1 and State-3 capacity bounds over an SNR grid.
    Bounds(BoundsArgs),
    /// Effective information rate versus training interval.
    Rate(RateArgs),
    /// Quick oracle checks of the core kernels.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Jsonl => OutputFormat::Jsonl,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    common: Common,
    /// Training intervals in blocks.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100")]
    intervals: Vec<u64>,
    /// Eb/N0 in dB; the first grid point of the config when omitted.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    snr_min: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr_max: f64,
    #[arg(long, default_value_t = 1.0)]
    snr_step: f64,
    /// Pilot length that sets the State-1 residual error.
    #[arg(long, default_value_t = 512)]
    pilot_symbols: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn core_err(e: dpilot_core::Error) -> Failure {
    if e.is_config() {
        Failure::Config(e.into())
    } else {
        Failure::Runtime(e.into())
    }
}

fn load(common: &Common) -> std::result::Result<(LinkConfig, String), Failure> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("cannot read config {}", common.config.display()))
        .map_err(config_err)?;
    let mut config = LinkConfig::from_toml_str(&text)
        .with_context(|| format!("invalid config {}", common.config.display()))
        .map_err(config_err)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok((config, text))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .context("cannot write to stdout")
        }
    }
}

fn finish(
    common: &Common,
    config_text: &str,
    seed: u64,
    command: &str,
    text: &str,
    rows: usize,
) -> Result<()> {
    write_output(common.out.as_deref(), text)?;
    if let Some(out) = &common.out {
        let manifest = RunManifest::new(config_text, seed, command, common.format.into(), rows);
        write_manifest(&manifest, out)?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> std::result::Result<(), Failure> {
    let (config, text) = load(&args.common)?;
    let records = run_sweep_with_jobs(&config, args.common.jobs).map_err(core_err)?;
    for note in advisories(&records) {
        eprintln!("advisory: {note}");
    }
    let body = render_results(&records, args.common.format.into()).map_err(runtime_err)?;
    finish(
        &args.common,
        &text,
        config.seed,
        "sweep",
        &body,
        records.len(),
    )
    .map_err(runtime_err)
}

fn rate(args: &RateArgs) -> std::result::Result<(), Failure> {
    let (config, text) = load(&args.common)?;
    let ebn0 = args.ebn0.unwrap_or(config.ebn0_db[0]);
    let points =
        run_rate_sweep(&config, &args.intervals, ebn0, args.common.jobs).map_err(core_err)?;
    let body = render_table(&points, args.common.format.into()).map_err(runtime_err)?;
    finish(
        &args.common,
        &text,
        config.seed,
        "rate",
        &body,
        points.len(),
    )
    .map_err(runtime_err)
}

fn bounds(args: &BoundsArgs) -> std::result::Result<(), Failure> {
    if !(args.snr_step > 0.0) || !(args.snr_max >= args.snr_min) {
        return Err(config_err(anyhow::anyhow!("empty or reversed SNR grid")));
    }
    let steps = ((args.snr_max - args.snr_min) / args.snr_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| args.snr_min + i as f64 * args.snr_step)
        .collect();
    let curves = capacity_curves(&grid, args.pilot_symbols).map_err(core_err)?;
    let body = render_table(&curves, args.format.into()).map_err(runtime_err)?;
    write_output(args.out.as_deref(), &body).map_err(runtime_err)
}

fn selftest() -> std::result::Result<(), Failure> {
    let results = run_selftest();
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(runtime_err(anyhow::anyhow!(
            "{failed} of {} checks failed",
            results.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Rate(a) => rate(a),
        Command::Bounds(a) => bounds(a),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
