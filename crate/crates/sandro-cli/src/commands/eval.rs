//! `sandro eval`: compare an estimated transform against ground truth.

use std::path::PathBuf;

use clap::Args;

use sandro::io::read_transform;
use sandro::synthbench::{rotation_error_deg, translation_error_m};

use crate::config::{CommonFlags, Preset, RunConfig};
use crate::error::CliError;
use crate::output::emit;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Estimated transform: 16 row-major numbers as plain text, a JSON
    /// array, or any JSON record with a `transform` field (e.g. the output
    /// of `register`).
    pub estimate: PathBuf,
    /// Ground-truth transform, same accepted formats.
    pub ground_truth: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
    /// Write the verdict here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let config = RunConfig::resolve(&args.common, Preset::Scan)?;
    let estimate = read_transform(&args.estimate)?;
    let ground_truth = read_transform(&args.ground_truth)?;

    let rotation = rotation_error_deg(&estimate, &ground_truth);
    let translation = translation_error_m(&estimate, &ground_truth);
    let success = rotation <= config.thresholds.rotation_deg
        && translation <= config.thresholds.translation_m;

    let text = format!(
        "rotation_error_deg: {rotation:.9}\ntranslation_error_m: {translation:.9}\nsuccess: {success}\n"
    );
    emit(args.out.as_deref(), text.as_bytes())
}
