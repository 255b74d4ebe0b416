//! Command-line front end: load a scenario file, run one command, emit JSON
//! or CSV.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Scenario;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "planwise", version, about = "Robust planning under probabilistic forecasts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON).
    pub config: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Robust decision, objective and multipliers (JSON).
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Worst-case value over evenly spaced decisions (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Forecast sensitivities and the guaranteed objective after tightening
    /// each forecast by --delta (JSON).
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        delta: f64,
    },
    /// Sensitivity-driven refinement against the configured oracle (CSV).
    Refine {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        iters: usize,
    },
    /// Duality gap, strict-feasibility slack and feasibility radius (JSON).
    Check {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve { common }
            | Command::Sweep { common, .. }
            | Command::Sensitivity { common, .. }
            | Command::Refine { common, .. }
            | Command::Check { common } => common,
        }
    }
}

/// Run one command. Diagnostics go to `stderr`; the result goes to `stdout`
/// or the `--out` file. Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let common = cli.command.common();
    let scenario = Scenario::load(&common.config)?;
    for w in &scenario.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let text = match &cli.command {
        Command::Solve { .. } => commands::solve_cmd(&scenario)?,
        Command::Sweep { grid, .. } => commands::sweep_cmd(&scenario, *grid)?,
        Command::Sensitivity { delta, .. } => commands::sensitivity_cmd(&scenario, *delta)?,
        Command::Refine { iters, .. } => {
            let (csv, note) = commands::refine_cmd(&scenario, *iters)?;
            let _ = writeln!(stderr, "{note}");
            csv
        }
        Command::Check { .. } => commands::check_cmd(&scenario)?,
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source }),
    }
}
