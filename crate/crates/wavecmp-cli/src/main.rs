//! `wavecmp` — compare community-mobility reduction across two restriction
//! waves, from CMR-format CSV to radar charts, reports and a run manifest.
//!
//! Exit codes: 0 on success, 1 on data or validation errors, 2 on usage
//! errors (the argument parser's default).

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod analyze;
mod decompose_cmd;
mod flags;
mod manifest;

#[derive(Parser)]
#[command(
    name = "wavecmp",
    version,
    about = "Compare community-mobility reduction across two restriction waves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline for every configured locality
    Analyze(analyze::AnalyzeArgs),
    /// Split one series into trend, seasonal and remainder components
    Decompose(decompose_cmd::DecomposeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze::run(&args),
        Command::Decompose(args) => decompose_cmd::run(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
