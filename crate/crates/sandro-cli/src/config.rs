//! Run configuration: preset defaults, optional TOML config file (explicit
//! `--config` or the `SANDRO_CONFIG` environment variable), then
//! command-line flags, each layer overriding the previous one.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use sandro::synthbench::SuccessThresholds;
use sandro::{GncConfig, PartitionScheme, SelectionScope, SplitConfig};

use crate::error::CliError;

pub const CONFIG_ENV_VAR: &str = "SANDRO_CONFIG";

/// Baseline defaults per data regime: scan-scale clouds use a coarser
/// voxel than the metre-scale synthetic benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Room-scan scale: voxel 0.05 m.
    Scan,
    /// Synthetic benchmark scale: voxel 0.02 m.
    Synthetic,
}

impl Preset {
    pub fn voxel_size(self) -> f64 {
        match self {
            Preset::Scan => 0.05,
            Preset::Synthetic => 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Contiguous,
    Shuffled,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionArg {
    /// Compare hypotheses on their own subcloud's normalized loss.
    Subcloud,
    /// Re-score every hypothesis on the full correspondence set.
    Full,
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to preset defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    /// TOML config file (overrides the SANDRO_CONFIG environment variable).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Downsampling voxel edge in metres; 0 keeps clouds at full resolution.
    #[arg(long)]
    pub voxel: Option<f64>,
    /// Number of correspondence subclouds (1 = plain robust solve).
    #[arg(long)]
    pub splits: Option<usize>,
    /// Initial convexity parameter; omit to start from the largest initial
    /// squared residual.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Convexity annealing factor per iteration, in (0, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Convergence tolerance on the per-pair robust loss change.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration cap per solve.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// How correspondences are assigned to subclouds.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// How the winning subcloud hypothesis is selected.
    #[arg(long, value_enum)]
    pub selection: Option<SelectionArg>,
    /// Seed for all randomized steps (e.g. the shuffled partition scheme).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Success threshold on rotation error, degrees.
    #[arg(long)]
    pub threshold_rot_deg: Option<f64>,
    /// Success threshold on translation error, metres.
    #[arg(long)]
    pub threshold_trans_m: Option<f64>,
}

/// On-disk configuration. Every field is optional; unknown keys are
/// rejected so typos surface as errors instead of silently using defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub voxel_size: Option<f64>,
    /// Normal-estimation radius in metres (default 2 x voxel).
    pub normal_radius: Option<f64>,
    /// Descriptor radius in metres (default 5 x voxel).
    pub feature_radius: Option<f64>,
    pub alpha0: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub splits: Option<usize>,
    pub scheme: Option<SchemeArg>,
    pub selection: Option<SelectionArg>,
    pub seed: Option<u64>,
    pub threshold_rot_deg: Option<f64>,
    pub threshold_trans_m: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved run parameters, echoed verbatim into result records so a
/// run can be reproduced without the original flags or config file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub voxel_size: f64,
    pub normal_radius: f64,
    pub feature_radius: f64,
    pub seed: u64,
    pub gnc: GncConfig,
    pub split: SplitConfig,
    pub thresholds: SuccessThresholds,
}

impl RunConfig {
    /// Resolves flags over file config over preset defaults, validating
    /// every field.
    pub fn resolve(flags: &CommonFlags, preset: Preset) -> Result<Self, CliError> {
        let file = match flags.config.as_deref() {
            Some(path) => FileConfig::load(path)?,
            None => match std::env::var_os(CONFIG_ENV_VAR) {
                Some(path) => FileConfig::load(Path::new(&path))?,
                None => FileConfig::default(),
            },
        };

        let voxel_size = flags
            .voxel
            .or(file.voxel_size)
            .unwrap_or_else(|| preset.voxel_size());
        if !(voxel_size.is_finite() && voxel_size >= 0.0) {
            return Err(CliError::Config(format!("voxel size {voxel_size} invalid")));
        }
        // Feature radii scale with the resolved voxel unless set explicitly;
        // at full resolution (voxel 0) they fall back to the preset scale.
        let radius_base = if voxel_size > 0.0 {
            voxel_size
        } else {
            preset.voxel_size()
        };
        let normal_radius = file.normal_radius.unwrap_or(2.0 * radius_base);
        let feature_radius = file.feature_radius.unwrap_or(5.0 * radius_base);
        for (name, r) in [
            ("normal_radius", normal_radius),
            ("feature_radius", feature_radius),
        ] {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::Config(format!("{name} {r} must be positive")));
            }
        }

        let seed = flags.seed.or(file.seed).unwrap_or(0);

        let gnc = resolve_gnc(
            flags.alpha0.or(file.alpha0),
            flags.beta.or(file.beta),
            flags.epsilon.or(file.epsilon),
            flags.max_iters.or(file.max_iters),
        )?;

        let num_splits = flags.splits.or(file.splits).unwrap_or(4);
        if num_splits == 0 {
            return Err(CliError::Config("splits must be at least 1".into()));
        }
        let scheme = match flags
            .scheme
            .or(file.scheme)
            .unwrap_or(SchemeArg::Contiguous)
        {
            SchemeArg::Contiguous => PartitionScheme::Contiguous,
            SchemeArg::Shuffled => PartitionScheme::Shuffled { seed },
            SchemeArg::Spatial => PartitionScheme::Spatial,
        };
        let selection = match flags
            .selection
            .or(file.selection)
            .unwrap_or(SelectionArg::Subcloud)
        {
            SelectionArg::Subcloud => SelectionScope::PerSubcloudLoss,
            SelectionArg::Full => SelectionScope::FullSetLoss,
        };
        let split = SplitConfig {
            num_splits,
            scheme,
            selection,
        };

        let thresholds = resolve_thresholds(
            flags.threshold_rot_deg.or(file.threshold_rot_deg),
            flags.threshold_trans_m.or(file.threshold_trans_m),
        )?;

        Ok(Self {
            voxel_size,
            normal_radius,
            feature_radius,
            seed,
            gnc,
            split,
            thresholds,
        })
    }
}

pub fn resolve_gnc(
    alpha0: Option<f64>,
    beta: Option<f64>,
    epsilon: Option<f64>,
    max_iters: Option<usize>,
) -> Result<GncConfig, CliError> {
    let defaults = GncConfig::default();
    if let Some(a) = alpha0 {
        if !(a.is_finite() && a > 0.0) {
            return Err(CliError::Config(format!("alpha0 {a} must be positive")));
        }
    }
    let beta = beta.unwrap_or(defaults.beta);
    if !(beta > 0.0 && beta < 1.0) {
        return Err(CliError::Config(format!("beta {beta} must lie in (0, 1)")));
    }
    let epsilon = epsilon.unwrap_or(defaults.epsilon);
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(CliError::Config(format!("epsilon {epsilon} must be >= 0")));
    }
    let max_iterations = max_iters.unwrap_or(defaults.max_iterations);
    if max_iterations == 0 {
        return Err(CliError::Config("max-iters must be at least 1".into()));
    }
    Ok(GncConfig {
        alpha0,
        beta,
        epsilon,
        max_iterations,
        ..defaults
    })
}

pub fn resolve_thresholds(
    rotation_deg: Option<f64>,
    translation_m: Option<f64>,
) -> Result<SuccessThresholds, CliError> {
    let defaults = SuccessThresholds::default();
    let thresholds = SuccessThresholds {
        rotation_deg: rotation_deg.unwrap_or(defaults.rotation_deg),
        translation_m: translation_m.unwrap_or(defaults.translation_m),
    };
    for (name, v) in [
        ("threshold-rot-deg", thresholds.rotation_deg),
        ("threshold-trans-m", thresholds.translation_m),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Config(format!("{name} {v} must be positive")));
        }
    }
    Ok(thresholds)
}
