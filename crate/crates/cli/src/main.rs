//! `ball-ergodic <COMMAND> <CONFIG>`: runs one analysis on the map and
//! inputs described by a JSON config. Exit code 0 on a definitive result,
//! 2 when inconclusive, 1 on input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use report::Report;

/// Output directory used when neither `--out` nor the config sets one.
const OUT_ENV: &str = "BALL_ERGODIC_OUT";

#[derive(Parser)]
#[command(name = "ball-ergodic", version, about = "Mean ergodicity of composition operators on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify C_phi as uniformly mean ergodic, mean ergodic or neither.
    Classify(Common),
    /// Orbit of a point under the map.
    Iterate(Common),
    /// Cesaro mean gaps and power bounds over the test dictionary.
    Cesaro(Common),
    /// Denjoy-Wolff point of a map without interior fixed points.
    Dw(Common),
    /// Bergman and pseudo-hyperbolic distance between two points.
    Metric(Common),
    /// Ratio condition, separation and interpolants of a node sequence.
    Interp(Common),
    /// Triangular array and witness function for a failing map.
    Witness(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long)]
    grid_levels: Option<u32>,
    #[arg(long)]
    dirs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the report, traces and canonical config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            tol: self.tol,
            j_max: self.jmax,
            grid_levels: self.grid_levels,
            dirs: self.dirs,
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<Report> {
    let (common, command): (&Common, fn(&RunConfig) -> Result<Report>) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Iterate(c) => (c, commands::iterate),
        Command::Cesaro(c) => (c, commands::cesaro),
        Command::Dw(c) => (c, commands::dw),
        Command::Metric(c) => (c, commands::metric),
        Command::Interp(c) => (c, commands::interp),
        Command::Witness(c) => (c, commands::witness),
    };
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.apply(&common.overrides())?;
    let report = command(&cfg)?;
    print!("{}", report.text());
    let out = cfg.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from));
    if let Some(dir) = out {
        for path in report.write(&dir, &cfg.canonical())? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => ExitCode::from(report.outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
