use crate::geometry::{Point3, RigidTransform};

use super::loss::{loss_from_sq, weight_from_sq};
use super::svd::weighted_svd;
use super::{GncConfig, IterationTrace, SolveReport, SolverError};

/// Annealing never pushes `alpha` below this fraction of `alpha0`; with
/// the default schedule the floor is unreachable, but aggressive `beta` or
/// long runs would otherwise collapse every weight to zero.
const ALPHA_FLOOR_FRACTION: f64 = 1e-12;

/// Fallback for the degenerate auto-init case where every residual at the
/// initial transform is exactly zero.
const MIN_AUTO_ALPHA: f64 = 1e-12;

/// A consistent snapshot of the solver: residuals of `transform`, the IRLS
/// weights and robust loss at `alpha`. Constructing it through
/// [`IrlsState::evaluate`] is the only way to obtain one, so the stored
/// quantities always agree with each other.
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsState {
    pub transform: RigidTransform,
    pub residual_norms: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub iteration: usize,
}

impl IrlsState {
    /// Evaluates residuals, weights and loss of `transform` on the pairs.
    pub fn evaluate(
        source: &[Point3],
        target: &[Point3],
        transform: RigidTransform,
        alpha: f64,
        iteration: usize,
    ) -> Self {
        assert_eq!(source.len(), target.len(), "paired slices must match");
        assert!(alpha > 0.0, "alpha must be positive");
        let mut residual_norms = Vec::with_capacity(source.len());
        let mut weights = Vec::with_capacity(source.len());
        let mut gamma = 0.0;
        for (s, t) in source.iter().zip(target) {
            let r_sq = (t.coords - transform.apply_point(s).coords).norm_squared();
            residual_norms.push(r_sq.sqrt());
            weights.push(weight_from_sq(r_sq, alpha));
            gamma += loss_from_sq(r_sq, alpha);
        }
        Self {
            transform,
            residual_norms,
            weights,
            alpha,
            gamma,
            iteration,
        }
    }
}

/// Robust alignment of paired points by iteratively reweighted least
/// squares under a graduated Geman-McClure loss.
///
/// Starting from `config.initial_transform` with a large convexity
/// parameter `alpha` (every pair effectively inlying), each iteration
/// recomputes residuals and weights, refits the transform with
/// [`weighted_svd`], and shrinks `alpha` by `config.beta`. Far-off pairs
/// saturate and lose weight as `alpha` anneals, but no pair is ever
/// discarded outright. The loop stops when the robust loss moves by less
/// than `epsilon * n * alpha0` between iterations, or at the iteration cap.
///
/// Returns the last transform together with the robust loss evaluated at
/// the final `alpha` — the figure of merit that correspondence splitting
/// compares across sub-solves.
pub fn irls_solve(
    source: &[Point3],
    target: &[Point3],
    config: &GncConfig,
) -> Result<SolveReport, SolverError> {
    assert_eq!(source.len(), target.len(), "paired slices must match");
    config.validate()?;
    let n = source.len();
    if n < 3 {
        return Err(SolverError::InsufficientCorrespondences { got: n });
    }
    let finite = |pts: &[Point3]| pts.iter().all(|p| p.coords.iter().all(|v| v.is_finite()));
    if !finite(source) || !finite(target) {
        return Err(SolverError::NonFiniteInput);
    }

    let mut transform = config.initial_transform;
    let mut residuals_sq = vec![0.0_f64; n];
    let compute_residuals = |t: &RigidTransform, out: &mut [f64]| {
        for ((s, p), r) in source.iter().zip(target).zip(out.iter_mut()) {
            *r = (p.coords - t.apply_point(s).coords).norm_squared();
        }
    };
    compute_residuals(&transform, &mut residuals_sq);

    let alpha0 = match config.alpha0 {
        Some(a) => a,
        None => residuals_sq
            .iter()
            .fold(0.0_f64, |m, &r| m.max(r))
            .max(MIN_AUTO_ALPHA),
    };
    let alpha_floor = ALPHA_FLOOR_FRACTION * alpha0;
    let gamma_tolerance = config.epsilon * n as f64 * alpha0;

    let mut alpha = alpha0;
    let mut weights = vec![0.0_f64; n];
    let mut gamma_prev: Option<f64> = None;
    let mut trace = config.record_trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        let mut gamma = 0.0;
        for (&r_sq, w) in residuals_sq.iter().zip(weights.iter_mut()) {
            *w = weight_from_sq(r_sq, alpha);
            gamma += loss_from_sq(r_sq, alpha);
        }
        transform = weighted_svd(source, target, &weights)?;
        compute_residuals(&transform, &mut residuals_sq);

        if let Some(trace) = trace.as_mut() {
            let gamma_after_solve = residuals_sq
                .iter()
                .map(|&r_sq| loss_from_sq(r_sq, alpha))
                .sum();
            let (mut w_min, mut w_max, mut w_sum) = (f64::INFINITY, 0.0_f64, 0.0);
            for &w in &weights {
                w_min = w_min.min(w);
                w_max = w_max.max(w);
                w_sum += w;
            }
            trace.push(IterationTrace {
                iteration: iterations,
                alpha,
                gamma,
                gamma_after_solve,
                weight_min: w_min,
                weight_max: w_max,
                weight_mean: w_sum / n as f64,
            });
        }

        alpha = (alpha * config.beta).max(alpha_floor);
        if let Some(prev) = gamma_prev {
            if (gamma - prev).abs() < gamma_tolerance {
                converged = true;
                break;
            }
        }
        gamma_prev = Some(gamma);
    }

    let final_gamma = residuals_sq
        .iter()
        .map(|&r_sq| loss_from_sq(r_sq, alpha))
        .sum();
    Ok(SolveReport {
        transform,
        final_gamma,
        final_alpha: alpha,
        alpha0,
        iterations,
        converged,
        trace,
    })
}
