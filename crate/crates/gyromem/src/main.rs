//! Command-line front end: each subcommand reads a JSON scenario, runs the
//! matching study, and writes its tables and summary into the output
//! directory. Exit code 0 on success, 2 for configuration or usage
//! problems, 1 for runtime failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use gyromem::harness::{
    load_config, run_effective, run_epsilon_sweep, run_kernel_validate, run_resonance,
    run_scaling, run_twoscale,
};
use gyromem::Result;

#[derive(Parser)]
#[command(
    name = "gyromem",
    version,
    about = "Memory kernels, effective transport, and particle cross-checks \
             for strongly magnetized kinetic dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario description (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Directory the tables and summary are written into
    #[arg(long)]
    out: PathBuf,
    /// Seed for the sampled components; deterministic studies ignore it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-check kernel constructions and their defining equation
    KernelValidate(RunArgs),
    /// Integrate the memory equation and compare with the closed solution
    Effective(RunArgs),
    /// Tabulate the two-scale limit profile and its averaged density
    Twoscale(RunArgs),
    /// Drive particle ensembles toward the limit over shrinking epsilon
    EpsilonSweep(RunArgs),
    /// Follow the resonant trajectory against its closed form
    Resonance(RunArgs),
    /// Reduce laboratory scales to the dimensionless groups
    Scaling(RunArgs),
}

fn run(cli: Cli) -> Result<PathBuf> {
    match cli.command {
        Command::KernelValidate(a) => {
            run_kernel_validate(&load_config(&a.config)?, &a.out, a.seed)
        }
        Command::Effective(a) => run_effective(&load_config(&a.config)?, &a.out, a.seed),
        Command::Twoscale(a) => run_twoscale(&load_config(&a.config)?, &a.out, a.seed),
        Command::EpsilonSweep(a) => run_epsilon_sweep(&load_config(&a.config)?, &a.out, a.seed),
        Command::Resonance(a) => run_resonance(&load_config(&a.config)?, &a.out, a.seed),
        Command::Scaling(a) => run_scaling(&load_config(&a.config)?, &a.out, a.seed),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => println!("wrote {}", summary.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
