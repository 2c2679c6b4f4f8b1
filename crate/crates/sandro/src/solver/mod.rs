//! Robust correspondence-based alignment: graduated non-convexity over a
//! Geman-McClure loss, with each reweighted inner problem solved in closed
//! form by [`weighted_svd`].

mod irls;
mod loss;
mod svd;

pub use irls::{irls_solve, IrlsState};
pub use loss::{geman_mcclure_loss, geman_mcclure_term, irls_weight, irls_weights, loss_profile};
pub use svd::{weighted_sse, weighted_svd};

use crate::geometry::RigidTransform;
use serde::{Deserialize, Serialize};

/// Errors from the solver family.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    /// A rigid fit needs at least three pairs.
    #[error("need at least 3 correspondences, got {got}")]
    InsufficientCorrespondences { got: usize },
    /// The weighted cross-covariance had rank < 2; the rotation is not
    /// determined (collinear or single-point geometry).
    #[error("degenerate correspondence geometry (singular values {singular_values:?})")]
    DegenerateGeometry { singular_values: [f64; 3] },
    /// A coordinate, weight or residual was NaN/infinite.
    #[error("non-finite input")]
    NonFiniteInput,
    /// All weights were zero.
    #[error("weights sum to zero")]
    ZeroWeightSum,
    /// A configuration field is out of range.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Configuration of the annealed IRLS solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GncConfig {
    /// Initial convexity parameter. `None` computes
    /// `max_i ||r_i(initial_transform)||^2` — start fully convex, with
    /// every pair inside the quadratic basin.
    pub alpha0: Option<f64>,
    /// Multiplicative annealing factor per iteration, in `(0, 1)`.
    pub beta: f64,
    /// Relative convergence tolerance: the solve stops when the robust loss
    /// changes by less than `epsilon * n * alpha0` between iterations.
    pub epsilon: f64,
    /// Hard iteration cap (the annealing itself keeps the loss moving, so
    /// this is the usual stopping point at default `epsilon`).
    pub max_iterations: usize,
    /// Starting transform for the first residual evaluation.
    pub initial_transform: RigidTransform,
    /// Record per-iteration summaries in the report.
    pub record_trace: bool,
}

impl Default for GncConfig {
    fn default() -> Self {
        Self {
            alpha0: None,
            beta: 0.9,
            epsilon: 1e-6,
            max_iterations: 100,
            initial_transform: RigidTransform::identity(),
            record_trace: false,
        }
    }
}

impl GncConfig {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if let Some(a) = self.alpha0 {
            if !(a.is_finite() && a > 0.0) {
                return Err(SolverError::InvalidConfig(format!("alpha0 = {a}")));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(SolverError::InvalidConfig(format!("beta = {}", self.beta)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "epsilon = {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig("max_iterations = 0".into()));
        }
        Ok(())
    }
}

/// Per-iteration summary recorded when [`GncConfig::record_trace`] is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Convexity parameter in effect for this iteration's weights.
    pub alpha: f64,
    /// Robust loss of the incoming transform at `alpha`.
    pub gamma: f64,
    /// Robust loss of the refitted transform at the same `alpha`; by the
    /// majorize-minimize argument this never exceeds `gamma`.
    pub gamma_after_solve: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_mean: f64,
}

/// Result of an annealed IRLS solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Best transform found (maps source points onto target points).
    pub transform: RigidTransform,
    /// Robust loss of `transform`, evaluated at `final_alpha`.
    pub final_gamma: f64,
    /// Convexity parameter after the last annealing step.
    pub final_alpha: f64,
    /// The `alpha0` actually used (configured or auto-computed).
    pub alpha0: f64,
    /// Number of iterations executed.
    pub iterations: usize,
    /// True when the loss-change criterion stopped the solve (as opposed to
    /// the iteration cap).
    pub converged: bool,
    /// Present when [`GncConfig::record_trace`] was set.
    pub trace: Option<Vec<IterationTrace>>,
}
