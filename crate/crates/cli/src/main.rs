//! `gaussmet` command-line interface.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::{Command, Options, RunConfig};

#[derive(Parser)]
#[command(name = "gaussmet", version, about = "Phase estimation with Gaussian probes in passive linear optics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Quantum Fisher information of a state through a circuit.
    Qfi(Options),
    /// The bound 8‖g‖²N̄(N̄+1).
    Bound(Options),
    /// The optimal squeezed-vacuum probe.
    OptimalProbe(Options),
    /// Homodyne readout model and its Fisher information.
    Homodyne(Options),
    /// Monte Carlo maximum-likelihood estimation from homodyne samples.
    Montecarlo(Options),
    /// L passes with optimal controls.
    Sequential(Options),
    /// Bound audit over seeded random states.
    Audit(Options),
    /// Trace inequalities on seeded random matrix pairs.
    Lemmas(Options),
    /// QFI of the optimal probe for the four reference interferometers.
    Table1(Options),
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn config_from(sub: Sub) -> Result<RunConfig, Failure> {
    let (command, options) = match sub {
        Sub::Qfi(o) => (Command::Qfi, o),
        Sub::Bound(o) => (Command::Bound, o),
        Sub::OptimalProbe(o) => (Command::OptimalProbe, o),
        Sub::Homodyne(o) => (Command::Homodyne, o),
        Sub::Montecarlo(o) => (Command::Montecarlo, o),
        Sub::Sequential(o) => (Command::Sequential, o),
        Sub::Audit(o) => (Command::Audit, o),
        Sub::Lemmas(o) => (Command::Lemmas, o),
        Sub::Table1(o) => (Command::Table1, o),
        Sub::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", config.display())))?;
            return RunConfig::from_json(&text).map_err(Failure::Validation);
        }
    };
    Ok(RunConfig { command, options })
}

fn execute(sub: Sub) -> Result<(), Failure> {
    let cfg = config_from(sub)?;
    cfg.validate().map_err(Failure::Validation)?;
    let o = &cfg.options;
    let report = match o.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure::Validation(e.to_string()))?
            .install(|| commands::run(&cfg))?,
        None => commands::run(&cfg)?,
    };
    report
        .write(o.format.unwrap_or_default(), o.output.as_deref())
        .map_err(|e| Failure::Validation(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
