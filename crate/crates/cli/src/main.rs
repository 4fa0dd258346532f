use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use fractalfn::config::{parse_config_with_mode, Mode};
use fractalfn::run::run;

/// Local fractal functions: RB-operator fixed points, local IFS attractors,
/// contractivity checks and fractal surfaces.
#[derive(Debug, Parser)]
#[command(name = "fractalfn", version)]
struct Cli {
    /// solve, attract, global-attract, check, interp, tensor or graph-ifs
    #[arg(value_parser = |s: &str| s.parse::<Mode>())]
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and report.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Grid intervals M, overriding the config.
    #[arg(long)]
    grid: Option<usize>,
    /// Solver tolerance, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for `start = random`, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main_inner(cli: Cli) -> Result<i32> {
    let text = std::fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = parse_config_with_mode(&text, Some(cli.mode)).with_context(|| cli.config.display().to_string())?;
    if let Some(m) = cli.grid {
        anyhow::ensure!(m >= 2, "--grid must be at least 2");
        cfg.grid = m;
    }
    if let Some(t) = cli.tol {
        anyhow::ensure!(t >= 0.0, "--tol must be nonnegative");
        cfg.tol = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let outcome = run(&cfg, &cli.out)?;
    print!("{}", outcome.report);
    Ok(outcome.status)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
