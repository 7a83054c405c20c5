use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mdimlab::harness::{run_suite, ExperimentConfig, OutputFormat, Suite};

/// Runs one verification suite and writes its report.
///
/// Exit status is 0 when every check passed, 1 when some check failed, and 2 on errors.
#[derive(Parser, Debug)]
#[command(name = "mdimlab", version)]
struct Cli {
    /// machine, kraft, geometry, coding-bounds, kprofile, mdim, dpi, reverse-dpi, conservation or
    /// counterexample.
    suite: String,
    /// JSON experiment config. Its `suite` field, when set, must match.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json; overrides the config.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Report path; stdout when absent from both the flag and the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MDIMLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow::anyhow!("MDIMLAB_THREADS must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    init_threads()?;
    let suite: Suite = cli.suite.parse()?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cfg.suite.is_empty() {
        cfg.suite = suite.name().to_string();
    } else if cfg.suite != suite.name() {
        anyhow::bail!("config is for suite {:?}, not {:?}", cfg.suite, suite.name());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(out) = cli.out {
        cfg.output.path = Some(out);
    }
    let report = run_suite(&cfg)?;
    let text = report.render(cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    eprintln!("{}: {} passed, {} failed", report.suite, report.pass_count, report.fail_count);
    for row in report.failures() {
        eprintln!("  FAIL {} [{}] lhs={:?} rhs={:?} {}", row.name, row.subject, row.lhs, row.rhs, row.detail);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
