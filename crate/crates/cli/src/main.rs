mod config;
mod csv;
mod error;
mod experiments;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Batch runner for the coupled beam and wave experiments.
#[derive(Parser)]
#[command(name = "phdd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip SVG plots.
        #[arg(long)]
        no_plots: bool,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let Command::Run {
        config,
        out,
        no_plots,
    } = cli.command;
    let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
    let written = experiments::run(&cfg, &dir, cfg.plots && !no_plots)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phdd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
