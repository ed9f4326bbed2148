//! `tokenprune`: prune, diagnose, synthesize and benchmark from the shell.
//!
//! Machine-readable output goes to stdout (or `--out`), human-readable
//! diagnostics to stderr. Exit status is 0 on success, 1 on I/O failure and
//! 2 on usage or validation errors.

mod bench;
mod diagnose;
mod error;
mod flops_spec;
mod prune;
mod synth;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tokenprune", version = tokenprune_core::VERSION, about = "Subject-first visual token reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a token matrix and write the result JSON.
    Prune(prune::PruneArgs),
    /// Coverage, FLOPs and recall report for a prune result.
    Diagnose(diagnose::DiagnoseArgs),
    /// Generate a labelled synthetic scene.
    Synth(synth::SynthArgs),
    /// Time the pruning stages and emit CSV.
    Bench(bench::BenchArgs),
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub(crate) fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Prune(args) => prune::run(args),
        Command::Diagnose(args) => diagnose::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
