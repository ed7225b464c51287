use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rateind::cli;
use rateind::config::RunConfig;

#[derive(Parser)]
#[command(name = "rateind", version, about = "Incremental schemes and certificates for rate-independent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of the quasi-random minimizer samples (overrides `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Balance tolerance (overrides `tolerance`).
    #[arg(long, value_name = "X")]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme and write the trajectory.
    Solve(Common),
    /// Run a parameter sweep and certify the limit.
    Sweep(Common),
    /// Verify a stored trajectory.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV written by `solve`.
        trajectory: PathBuf,
    },
    /// Write plot-ready energy landscapes and stability regions.
    Landscape(Common),
    /// Reproduce the sextic benchmark numbers as a pass/fail table.
    Example2(Common),
}

fn load(common: &Common, required: bool) -> Result<RunConfig, i32> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| {
            log::error!("{e}");
            cli::exit_code(&e)
        })?,
        None if required => {
            log::error!("--config is required for this command");
            return Err(cli::EXIT_CONFIG);
        }
        None => RunConfig::for_catalog("example2"),
    };
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = common.tolerance {
        cfg.tolerance = tol;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Cli::parse();
    let code = match &args.command {
        Command::Solve(c) => load(c, true).map(|cfg| cli::cmd_solve(&cfg)),
        Command::Sweep(c) => load(c, true).map(|cfg| cli::cmd_sweep(&cfg)),
        Command::Verify { common, trajectory } => load(common, true).map(|cfg| cli::cmd_verify(&cfg, trajectory)),
        Command::Landscape(c) => load(c, false).map(|cfg| cli::cmd_landscape(&cfg)),
        Command::Example2(c) => load(c, false).map(|cfg| cli::cmd_example2(&cfg)),
    };
    ExitCode::from(code.unwrap_or_else(|c| c) as u8)
}
