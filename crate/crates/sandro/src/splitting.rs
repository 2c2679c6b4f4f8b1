//! Correspondence splitting: partition the putative matches into subclouds,
//! register each independently, and keep the best hypothesis.
//!
//! Structured outliers (a repeated part, a symmetric lobe) can form a
//! self-consistent minority that a single robust solve locks onto. Splitting
//! dilutes that minority: at least one subcloud tends to be dominated by
//! inliers, and its solution wins the final comparison.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use nalgebra::Point3;

use crate::features::CorrespondenceSet;
use crate::geometry::{PointCloud, RigidTransform};
use crate::solver::{geman_mcclure_loss, irls_solve, GncConfig, SolveReport, SolverError};

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("cannot split into zero subclouds")]
    ZeroSplits,
    #[error("{got} correspondences cannot fill {splits} subclouds of at least 3")]
    TooFewCorrespondences { got: usize, splits: usize },
    #[error("every subcloud solve failed: {}", errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    AllSplitsFailed { errors: Vec<SolverError> },
}

/// How correspondences are assigned to subclouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionScheme {
    /// Consecutive runs in the original correspondence order.
    Contiguous,
    /// A seeded uniform shuffle of the correspondence positions.
    Shuffled { seed: u64 },
    /// Sort by the source-point coordinate along the axis of largest
    /// variance, then cut into runs — subclouds become spatial slabs.
    Spatial,
}

/// Which residual set the subcloud hypotheses are compared on.
///
/// Either way the robust losses are evaluated at a common convexity
/// parameter — the smallest final `alpha` any subcloud reached — because
/// losses taken at different `alpha` are not comparable: annealing deeper
/// shrinks the loss regardless of fit quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SelectionScope {
    /// Each hypothesis scored on its own subcloud's residuals, divided by
    /// the subcloud size (sizes may differ by one).
    #[default]
    PerSubcloudLoss,
    /// Each hypothesis re-scored on the full correspondence set.
    FullSetLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub num_splits: usize,
    pub scheme: PartitionScheme,
    pub selection: SelectionScope,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            num_splits: 4,
            scheme: PartitionScheme::Contiguous,
            selection: SelectionScope::default(),
        }
    }
}

/// Outcome of a split-and-select registration.
#[derive(Debug)]
pub struct SplitReport {
    /// Index of the winning subcloud.
    pub winner: usize,
    /// The winning transform.
    pub transform: crate::geometry::RigidTransform,
    /// Score per subcloud under the configured [`SelectionScope`]
    /// (infinite for subclouds whose solve failed).
    pub comparison_losses: Vec<f64>,
    /// Every subcloud's solve outcome, in subcloud order.
    pub reports: Vec<Result<SolveReport, SolverError>>,
}

/// Partitions `correspondences` into `config.num_splits` subsets of
/// near-equal size (differing by at most one, larger ones first).
///
/// Whatever the scheme, each subset keeps its pairs in the original
/// correspondence order, so a single-subset split reproduces the input
/// exactly and downstream solves are order-deterministic.
pub fn split_correspondences(
    correspondences: &CorrespondenceSet,
    source: &PointCloud,
    config: &SplitConfig,
) -> Result<Vec<CorrespondenceSet>, SplitError> {
    let s = config.num_splits;
    if s == 0 {
        return Err(SplitError::ZeroSplits);
    }
    let n = correspondences.len();
    if n < 3 * s {
        return Err(SplitError::TooFewCorrespondences { got: n, splits: s });
    }

    // Positions into the correspondence list, arranged per scheme.
    let mut order: Vec<usize> = (0..n).collect();
    match config.scheme {
        PartitionScheme::Contiguous => {}
        PartitionScheme::Shuffled { seed } => {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        PartitionScheme::Spatial => {
            let pts: Vec<_> = correspondences
                .pairs()
                .iter()
                .map(|&(i, _)| source.points()[i])
                .collect();
            let mean = pts
                .iter()
                .fold(nalgebra::Vector3::zeros(), |a, p| a + p.coords)
                / n as f64;
            let mut variance = [0.0f64; 3];
            for p in &pts {
                let d = p.coords - mean;
                for axis in 0..3 {
                    variance[axis] += d[axis] * d[axis];
                }
            }
            let axis = variance
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            order.sort_by(|&a, &b| {
                pts[a].coords[axis]
                    .total_cmp(&pts[b].coords[axis])
                    .then(a.cmp(&b))
            });
        }
    }

    let base = n / s;
    let extra = n % s;
    let pairs = correspondences.pairs();
    let mut subsets = Vec::with_capacity(s);
    let mut cursor = 0;
    for block in 0..s {
        let len = base + usize::from(block < extra);
        let mut positions: Vec<usize> = order[cursor..cursor + len].to_vec();
        cursor += len;
        positions.sort_unstable(); // canonical original order
        let subset: Vec<(usize, usize)> = positions.into_iter().map(|p| pairs[p]).collect();
        subsets.push(CorrespondenceSet::from_validated(subset));
    }
    Ok(subsets)
}

/// Registers each subcloud independently and selects the best hypothesis.
///
/// With `num_splits == 1` this is exactly a plain robust solve on the full
/// set. Ties on the comparison loss resolve to the lower subcloud index.
pub fn solve_with_splits(
    source: &PointCloud,
    target: &PointCloud,
    correspondences: &CorrespondenceSet,
    gnc: &GncConfig,
    config: &SplitConfig,
) -> Result<SplitReport, SplitError> {
    let subsets = split_correspondences(correspondences, source, config)?;

    let reports: Vec<Result<SolveReport, SolverError>> = subsets
        .par_iter()
        .map(|subset| {
            let (s_pts, t_pts) = subset.gather(source, target);
            irls_solve(&s_pts, &t_pts, gnc)
        })
        .collect();

    if reports.iter().all(|r| r.is_err()) {
        let errors = reports
            .iter()
            .filter_map(|r| r.as_ref().err())
            .cloned()
            .collect();
        return Err(SplitError::AllSplitsFailed { errors });
    }

    // Losses from runs that annealed to different depths are not comparable,
    // so every hypothesis is re-scored at the deepest alpha reached.
    let alpha_common = reports
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|rep| rep.final_alpha)
        .fold(f64::INFINITY, f64::min);
    let score = |transform: &RigidTransform, s_pts: &[Point3<f64>], t_pts: &[Point3<f64>]| {
        let norms: Vec<f64> = s_pts
            .iter()
            .zip(t_pts)
            .map(|(s, t)| (t - transform.apply_point(s)).norm())
            .collect();
        geman_mcclure_loss(&norms, alpha_common)
    };
    let comparison_losses: Vec<f64> = match config.selection {
        SelectionScope::PerSubcloudLoss => reports
            .iter()
            .zip(&subsets)
            .map(|(r, subset)| match r {
                Ok(rep) => {
                    let (s_pts, t_pts) = subset.gather(source, target);
                    score(&rep.transform, &s_pts, &t_pts) / subset.len() as f64
                }
                Err(_) => f64::INFINITY,
            })
            .collect(),
        SelectionScope::FullSetLoss => {
            let (full_s, full_t) = correspondences.gather(source, target);
            reports
                .iter()
                .map(|r| match r {
                    Ok(rep) => score(&rep.transform, &full_s, &full_t),
                    Err(_) => f64::INFINITY,
                })
                .collect()
        }
    };

    // `min_by` keeps the first of equal minima, i.e. the lower index.
    let winner = comparison_losses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("at least one subcloud");
    let transform = reports[winner]
        .as_ref()
        .expect("winner has a finite loss, so its solve succeeded")
        .transform;

    Ok(SplitReport {
        winner,
        transform,
        comparison_losses,
        reports,
    })
}
