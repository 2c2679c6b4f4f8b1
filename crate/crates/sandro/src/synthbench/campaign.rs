use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{PointCloud, RigidTransform};
use crate::solver::GncConfig;
use crate::splitting::{solve_with_splits, SplitConfig};

use super::metrics::{rotation_error_deg, translation_error_m};
use super::scenario::{generate_pair, ScenarioConfig, SynthError};

/// A labelled solver configuration entered in a campaign. A single-split
/// config is the plain (no splitting) solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    /// Short name used in record streams and CSV (no commas or newlines).
    pub label: String,
    pub gnc: GncConfig,
    pub split: SplitConfig,
}

/// Success criterion applied to every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessThresholds {
    pub rotation_deg: f64,
    pub translation_m: f64,
}

impl Default for SuccessThresholds {
    fn default() -> Self {
        Self {
            rotation_deg: 10.0,
            translation_m: 1.0,
        }
    }
}

/// Outcome of one (scenario, trial, method) cell.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub method: String,
    pub outlier_rate: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub ground_truth: RigidTransform,
    /// Absent when the solve failed outright.
    pub estimate: Option<RigidTransform>,
    /// Infinite when the solve failed.
    pub rotation_error_deg: f64,
    pub translation_error_m: f64,
    pub success: bool,
    pub wall_time_ms: f64,
}

/// One aggregate CSV row: a (method, scenario) pair. Error medians are
/// taken over successful trials only and are NaN when none succeeded.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub method: String,
    pub outlier_rate: f64,
    pub trials: usize,
    pub success_rate: f64,
    pub median_rot_err_deg: f64,
    pub median_trans_err_m: f64,
    pub mean_wall_ms: f64,
}

#[derive(Debug)]
pub struct CampaignResult {
    /// Every trial outcome, ordered by (scenario, trial, method).
    pub records: Vec<TrialRecord>,
    /// One row per (scenario, method), scenarios outermost.
    pub aggregates: Vec<AggregateRow>,
}

/// Derives the per-trial seed from a scenario's master seed
/// (SplitMix64-style mixing, so nearby trial indices decorrelate).
pub(crate) fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add((trial.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every method over every scenario's trials and aggregates success
/// statistics.
///
/// All methods of a trial share the same generated pair, so comparisons
/// are paired. Trials run in parallel but records come back in
/// deterministic order, and everything except wall time is a pure
/// function of (source, scenarios, methods, seeds). Individual solve
/// failures are recorded as unsuccessful trials; they never abort the
/// campaign.
pub fn run_campaign(
    source: &PointCloud,
    scenarios: &[ScenarioConfig],
    methods: &[MethodConfig],
    thresholds: &SuccessThresholds,
) -> Result<CampaignResult, SynthError> {
    if scenarios.is_empty() {
        return Err(SynthError::InvalidConfig("no scenarios given".into()));
    }
    if methods.is_empty() {
        return Err(SynthError::InvalidConfig("no methods given".into()));
    }
    for method in methods {
        if method.label.contains(',') || method.label.contains('\n') {
            return Err(SynthError::InvalidConfig(format!(
                "method label {:?} cannot contain commas or newlines",
                method.label
            )));
        }
    }
    if source.is_empty() {
        return Err(SynthError::EmptySource);
    }
    for scenario in scenarios {
        scenario.validate()?;
    }

    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for scenario in scenarios {
        let per_trial: Vec<Vec<TrialRecord>> = (0..scenario.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(scenario.seed, trial as u64);
                let pair = generate_pair(source, scenario, seed)
                    .expect("scenario and source validated above");
                methods
                    .iter()
                    .map(|method| {
                        let started = Instant::now();
                        let outcome = solve_with_splits(
                            &pair.source,
                            &pair.target,
                            &pair.correspondences,
                            &method.gnc,
                            &method.split,
                        );
                        let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
                        let (estimate, rot_err, trans_err) = match outcome {
                            Ok(report) => {
                                let r = rotation_error_deg(&report.transform, &pair.ground_truth);
                                let t = translation_error_m(&report.transform, &pair.ground_truth);
                                (Some(report.transform), r, t)
                            }
                            Err(_) => (None, f64::INFINITY, f64::INFINITY),
                        };
                        TrialRecord {
                            method: method.label.clone(),
                            outlier_rate: scenario.outlier_rate,
                            trial,
                            trial_seed: seed,
                            ground_truth: pair.ground_truth,
                            estimate,
                            rotation_error_deg: rot_err,
                            translation_error_m: trans_err,
                            success: rot_err <= thresholds.rotation_deg
                                && trans_err <= thresholds.translation_m,
                            wall_time_ms,
                        }
                    })
                    .collect()
            })
            .collect();

        for (m, method) in methods.iter().enumerate() {
            let cells: Vec<&TrialRecord> = per_trial.iter().map(|row| &row[m]).collect();
            let successes: Vec<&&TrialRecord> = cells.iter().filter(|r| r.success).collect();
            aggregates.push(AggregateRow {
                method: method.label.clone(),
                outlier_rate: scenario.outlier_rate,
                trials: cells.len(),
                success_rate: successes.len() as f64 / cells.len() as f64,
                median_rot_err_deg: median(successes.iter().map(|r| r.rotation_error_deg)),
                median_trans_err_m: median(successes.iter().map(|r| r.translation_error_m)),
                mean_wall_ms: cells.iter().map(|r| r.wall_time_ms).sum::<f64>()
                    / cells.len() as f64,
            });
        }
        records.extend(per_trial.into_iter().flatten());
    }

    Ok(CampaignResult {
        records,
        aggregates,
    })
}

/// Median of the values; NaN for an empty iterator.
fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Writes the aggregate table as CSV with a fixed column set.
pub fn write_aggregate_csv(rows: &[AggregateRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "method,outlier_rate,trials,success_rate,median_rot_err_deg,median_trans_err_m,mean_wall_ms"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.outlier_rate,
            r.trials,
            r.success_rate,
            r.median_rot_err_deg,
            r.median_trans_err_m,
            r.mean_wall_ms
        )?;
    }
    Ok(())
}

/// Writes one JSON object per line per trial record.
pub fn write_records_jsonl(records: &[TrialRecord], out: &mut impl Write) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut *out, record)?;
        writeln!(out)?;
    }
    Ok(())
}
