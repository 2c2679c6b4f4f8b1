//! `sandro bench`: run a synthetic outlier campaign from a TOML config and
//! emit the aggregate CSV (plus optional per-trial records and loss-profile
//! plot data).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use sandro::io::read_cloud;
use sandro::solver::loss_profile;
use sandro::synthbench::{
    builtin_source_cloud, run_campaign, write_aggregate_csv, write_records_jsonl, MethodConfig,
    RotationMagnitude, SuccessThresholds,
};
use sandro::{voxel_downsample, DecoyConfig, ScenarioConfig, SplitConfig};

use crate::config::{resolve_gnc, resolve_thresholds, Preset, SchemeArg, SelectionArg};
use crate::error::CliError;
use crate::output::{emit, write_atomic};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Campaign configuration (TOML). May be omitted when only
    /// --loss-profile output is wanted.
    pub config: Option<PathBuf>,
    /// Source cloud (PLY); omitted = the built-in two-lobe test cloud.
    #[arg(long, value_name = "PLY")]
    pub source: Option<PathBuf>,
    /// Write the aggregate CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write every trial as a JSON line.
    #[arg(long, value_name = "PATH")]
    pub records: Option<PathBuf>,
    /// Write robust-loss curves (alpha,residual_norm,loss CSV) for a family
    /// of convexity parameters, ready for plotting.
    #[arg(long, value_name = "PATH")]
    pub loss_profile: Option<PathBuf>,
}

/// On-disk campaign description. One scenario is run per outlier rate; all
/// scenarios share the trial count, seed and corruption geometry.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignFile {
    outlier_rates: Vec<f64>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    seed: u64,
    /// Voxel edge for downsampling the source before the campaign;
    /// 0 uses the cloud as-is. Default 0.02 m.
    #[serde(default = "default_voxel")]
    voxel_size: f64,
    #[serde(default)]
    inlier_noise_sigma: f64,
    /// Fixed ground-truth rotation angle in degrees; omit for rotations
    /// uniform over SO(3).
    rotation_deg: Option<f64>,
    #[serde(default = "default_translation_extent")]
    translation_extent: f64,
    #[serde(default = "default_sphere_radius")]
    sphere_radius: f64,
    sphere_center: Option<[f64; 3]>,
    decoy: Option<DecoyConfig>,
    thresholds: Option<ThresholdsEntry>,
    methods: Vec<MethodEntry>,
}

fn default_trials() -> usize {
    40
}
fn default_voxel() -> f64 {
    Preset::Synthetic.voxel_size()
}
fn default_translation_extent() -> f64 {
    2.0
}
fn default_sphere_radius() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsEntry {
    rotation_deg: Option<f64>,
    translation_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodEntry {
    label: String,
    /// Number of subclouds; 1 is the plain robust solve.
    #[serde(default = "default_splits")]
    splits: usize,
    scheme: Option<SchemeArg>,
    selection: Option<SelectionArg>,
    alpha0: Option<f64>,
    beta: Option<f64>,
    epsilon: Option<f64>,
    max_iters: Option<usize>,
}

fn default_splits() -> usize {
    1
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    if let Some(path) = &args.loss_profile {
        write_atomic(path, loss_profile_csv().as_bytes())?;
    }
    let Some(config_path) = &args.config else {
        if args.loss_profile.is_none() {
            return Err(CliError::Config(
                "nothing to do: pass a campaign config and/or --loss-profile".into(),
            ));
        }
        return Ok(());
    };

    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let campaign: CampaignFile = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", config_path.display())))?;
    if campaign.outlier_rates.is_empty() {
        return Err(CliError::Config("outlier_rates must not be empty".into()));
    }
    if campaign.methods.is_empty() {
        return Err(CliError::Config(
            "at least one [[methods]] entry required".into(),
        ));
    }

    let rotation = match campaign.rotation_deg {
        Some(deg) => RotationMagnitude::FixedAngleDeg(deg),
        None => RotationMagnitude::UniformSo3,
    };
    let scenarios: Vec<ScenarioConfig> = campaign
        .outlier_rates
        .iter()
        .map(|&rate| ScenarioConfig {
            outlier_rate: rate,
            inlier_noise_sigma: campaign.inlier_noise_sigma,
            rotation,
            translation_extent: campaign.translation_extent,
            sphere_radius: campaign.sphere_radius,
            sphere_center: campaign.sphere_center,
            trials: campaign.trials,
            seed: campaign.seed,
            decoy: campaign.decoy.clone(),
        })
        .collect();

    let methods: Vec<MethodConfig> = campaign
        .methods
        .iter()
        .map(|m| {
            if m.splits == 0 {
                return Err(CliError::Config(format!(
                    "method {:?}: splits must be at least 1",
                    m.label
                )));
            }
            let scheme = match m.scheme.unwrap_or(SchemeArg::Contiguous) {
                SchemeArg::Contiguous => sandro::PartitionScheme::Contiguous,
                SchemeArg::Shuffled => sandro::PartitionScheme::Shuffled {
                    seed: campaign.seed,
                },
                SchemeArg::Spatial => sandro::PartitionScheme::Spatial,
            };
            let selection = match m.selection.unwrap_or(SelectionArg::Subcloud) {
                SelectionArg::Subcloud => sandro::SelectionScope::PerSubcloudLoss,
                SelectionArg::Full => sandro::SelectionScope::FullSetLoss,
            };
            Ok(MethodConfig {
                label: m.label.clone(),
                gnc: resolve_gnc(m.alpha0, m.beta, m.epsilon, m.max_iters)?,
                split: SplitConfig {
                    num_splits: m.splits,
                    scheme,
                    selection,
                },
            })
        })
        .collect::<Result<_, _>>()?;

    let thresholds = match &campaign.thresholds {
        Some(t) => resolve_thresholds(t.rotation_deg, t.translation_m)?,
        None => SuccessThresholds::default(),
    };

    let source = match &args.source {
        Some(path) => read_cloud(path)?,
        None => builtin_source_cloud(),
    };
    if !(campaign.voxel_size.is_finite() && campaign.voxel_size >= 0.0) {
        return Err(CliError::Config(format!(
            "voxel_size {} invalid",
            campaign.voxel_size
        )));
    }
    let source = if campaign.voxel_size > 0.0 {
        voxel_downsample(&source, campaign.voxel_size)?
    } else {
        source
    };

    let result = run_campaign(&source, &scenarios, &methods, &thresholds)?;

    if let Some(path) = &args.records {
        let mut bytes = Vec::new();
        write_records_jsonl(&result.records, &mut bytes)?;
        write_atomic(path, &bytes)?;
    }
    let mut csv = Vec::new();
    write_aggregate_csv(&result.aggregates, &mut csv)?;
    emit(args.out.as_deref(), &csv)
}

fn loss_profile_csv() -> String {
    let alphas = [0.01, 0.1, 1.0, 10.0, 100.0];
    let grid: Vec<f64> = (0..=500).map(|i| i as f64 * 0.01).collect();
    let mut csv = String::from("alpha,residual_norm,loss\n");
    for (alpha, r, loss) in loss_profile(&alphas, &grid) {
        let _ = writeln!(csv, "{alpha},{r},{loss}");
    }
    csv
}
