//! `rotlattice`: spectra, densities, currents, Fermi seas and containment scans of
//! rotating atoms in a trapped 2D lattice.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{CommandKind, ConfigError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "rotlattice", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues, with closed-form levels for the trapped continuum
    Spectrum(RunArgs),
    /// Multiplet-averaged density of a level and its cross-sections
    Density(RunArgs),
    /// Bond currents of one eigenstate
    Currents(RunArgs),
    /// Density of a filled Fermi sea and its y = 0 cross-section
    Fermions(RunArgs),
    /// Refinement scan or escape-threshold bisection
    Contain(RunArgs),
    /// Ground energy and containment across rotation frequencies
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON or key = value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn resolve(kind: CommandKind, args: RunArgs) -> Result<RunConfig, ConfigError> {
    let base = match &args.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    RunConfig::resolve(kind, base.overlay(args.overrides))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::Density(a) => (CommandKind::Density, a),
        Command::Currents(a) => (CommandKind::Currents, a),
        Command::Fermions(a) => (CommandKind::Fermions, a),
        Command::Contain(a) => (CommandKind::Contain, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
    };
    let cfg = match resolve(kind, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match kind {
        CommandKind::Spectrum => commands::spectrum(&cfg),
        CommandKind::Density => commands::density_cmd(&cfg),
        CommandKind::Currents => commands::currents(&cfg),
        CommandKind::Fermions => commands::fermions(&cfg),
        CommandKind::Contain => commands::contain(&cfg),
        CommandKind::Sweep => commands::sweep(&cfg),
    };
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: not every solve converged; outputs hold partial results");
                ExitCode::FAILURE
            }
        }
        Err(rotlattice::Error::InvalidParameter { field, reason }) => {
            eprintln!("error: invalid value for `{field}`: {reason}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
