//! Command-line front-end for the registration toolkit.
//!
//! Failures print `error: category=<category> <message>` on stderr and exit
//! with a category-specific code (see [`error::CliError`]), so scripted
//! pipelines can branch without parsing prose.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sandro",
    version,
    about = "Robust rigid point-cloud registration",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a source cloud onto a target cloud.
    Register(commands::register::RegisterArgs),
    /// Dump FPFH descriptors for one cloud, or reciprocal matches for two.
    Features(commands::features::FeaturesArgs),
    /// Run a synthetic outlier campaign and emit aggregate CSV.
    Bench(commands::bench::BenchArgs),
    /// Compare an estimated transform against ground truth.
    Eval(commands::eval::EvalArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Register(args) => commands::register::run(args),
        Command::Features(args) => commands::features::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::Eval(args) => commands::eval::run(args),
    };
    if let Err(e) = result {
        // A consumer closing stdout early (`sandro features … | head`) is
        // normal pipeline behaviour, not a failure worth reporting.
        if let error::CliError::Io(io) = &e {
            if io.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
        eprintln!("error: category={} {e}", e.category());
        std::process::exit(e.exit_code());
    }
}
