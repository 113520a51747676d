use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tactile_cli::commands::{cmd_compare, cmd_grasp, cmd_ripeness, cmd_slip};
use tactile_cli::scenario::{parse_scenario, Scenario};
use tactile_cli::CliError;

/// Simulated tactile grasping and fruit-hardness experiments.
#[derive(Parser)]
#[command(name = "tactile", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one grasp; writes trace.csv and outcome.json
    Grasp {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's simulator seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several scenarios; writes a hardness comparison table
    Compare {
        /// Scenario file; pass the flag once per scenario
        #[arg(long = "scenario", value_name = "PATH")]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-grasp the fruit across its ripeness schedule; writes the
    /// trajectory and fitted trends
    Ripeness {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a grasp with the scheduled slip; writes detected events
    Slip {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut scenario = parse_scenario(path)?;
    if let Some(seed) = seed {
        scenario.sim.seed = seed;
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Grasp { scenario, out, seed } => cmd_grasp(&load(&scenario, seed)?, &out),
        Command::Compare {
            scenarios,
            out,
            seed,
        } => {
            if scenarios.len() < 2 {
                return Err(CliError::Validation(format!(
                    "compare needs at least 2 --scenario arguments, got {}",
                    scenarios.len()
                )));
            }
            let loaded = scenarios
                .iter()
                .map(|p| load(p, seed))
                .collect::<Result<Vec<_>, _>>()?;
            cmd_compare(&loaded, &out)
        }
        Command::Ripeness { scenario, out, seed } => cmd_ripeness(&load(&scenario, seed)?, &out),
        Command::Slip { scenario, out, seed } => cmd_slip(&load(&scenario, seed)?, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
