//! `skewtmix` — fit, sample, and interrogate finite mixtures of
//! unrestricted multivariate skew t-distributions from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical/model failure.

mod commands;
mod errors;
mod model;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use errors::CliError;

#[derive(Parser)]
#[command(
    name = "skewtmix",
    version,
    about = "Finite mixtures of unrestricted multivariate skew t-distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a mixture model to CSV data via EM
    Fit(commands::fit::FitArgs),
    /// Draw samples from a saved model
    Sample(commands::sample::SampleArgs),
    /// Evaluate the mixture density on CSV data
    Density(commands::density::DensityArgs),
    /// Assign CSV rows to components by posterior probability
    Classify(commands::classify::ClassifyArgs),
    /// Likelihood-ratio test of zero skewness (symmetric vs skew fit)
    Lrtest(commands::lrtest::LrtestArgs),
    /// Export a contour grid of the fitted surface for external plotting
    Grid(commands::grid::GridArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::fit::run(args),
        Command::Sample(args) => commands::sample::run(args),
        Command::Density(args) => commands::density::run(args),
        Command::Classify(args) => commands::classify::run(args),
        Command::Lrtest(args) => commands::lrtest::run(args),
        Command::Grid(args) => commands::grid::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code() as u8)
        }
    }
}

/// Shared ingestion flags for subcommands that read CSV data.
#[derive(clap::Args)]
pub(crate) struct InputArgs {
    /// Input CSV file
    pub input: PathBuf,
    /// Columns to use, by name or 1-based index (comma-separated)
    #[arg(long)]
    pub columns: Option<String>,
    /// Treat the first row as data, not a header
    #[arg(long)]
    pub no_header: bool,
}

impl InputArgs {
    pub fn read(&self) -> Result<table::Table, CliError> {
        table::read_table(&self.input, !self.no_header, self.columns.as_deref())
    }
}
