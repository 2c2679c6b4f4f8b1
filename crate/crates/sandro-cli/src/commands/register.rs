//! `sandro register`: the end-to-end pipeline from two cloud files to an
//! estimated rigid transform.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use sandro::io::{read_cloud, read_matches};
use sandro::{solve_with_splits, CorrespondenceSet};

use crate::config::{CommonFlags, Preset, RunConfig};
use crate::error::CliError;
use crate::output::{emit, to_json_bytes, RegistrationResult};

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Source cloud (PLY); the estimated transform maps it onto the target.
    pub source: PathBuf,
    /// Target cloud (PLY).
    pub target: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
    /// Write the result record here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Use these `src_idx,tgt_idx` correspondences (indices into the clouds
    /// as stored, which skips downsampling) instead of FPFH matching.
    #[arg(long, value_name = "CSV")]
    pub matches: Option<PathBuf>,
}

pub fn run(args: &RegisterArgs) -> Result<(), CliError> {
    let config = RunConfig::resolve(&args.common, Preset::Scan)?;
    let source = read_cloud(&args.source)?;
    let target = read_cloud(&args.target)?;

    let started = Instant::now();
    // External matches address the stored clouds directly; the FPFH path
    // works on the preprocessed (downsampled) ones.
    let (source_work, target_work, correspondences) = match &args.matches {
        Some(path) => {
            let pairs = read_matches(path)?;
            let set = CorrespondenceSet::new(pairs, source.len(), target.len())?;
            (source, target, set)
        }
        None => {
            let (source_down, source_desc) = super::preprocess(&source, &config)?;
            let (target_down, target_desc) = super::preprocess(&target, &config)?;
            let set = sandro::mutual_match(&source_desc, &target_desc)?;
            (source_down, target_down, set)
        }
    };
    if correspondences.len() < 3 {
        return Err(CliError::Insufficient(format!(
            "{} correspondence(s), need at least 3",
            correspondences.len()
        )));
    }

    let report = solve_with_splits(
        &source_work,
        &target_work,
        &correspondences,
        &config.gnc,
        &config.split,
    )?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    let final_loss = report.reports[report.winner]
        .as_ref()
        .map(|r| r.final_gamma)
        .unwrap_or(f64::INFINITY);
    let result = RegistrationResult {
        transform: report.transform,
        final_loss,
        num_correspondences: correspondences.len(),
        num_splits: config.split.num_splits,
        winner: report.winner,
        per_split_losses: report.comparison_losses.clone(),
        wall_time_ms,
        config,
    };
    emit(args.out.as_deref(), &to_json_bytes(&result)?)
}
