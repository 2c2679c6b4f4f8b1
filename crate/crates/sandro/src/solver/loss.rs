//! Geman-McClure robust loss and its IRLS weights.
//!
//! Per residual norm `r` and convexity parameter `alpha > 0`:
//!
//! ```text
//! loss(r)   = alpha * r^2 / (alpha + r^2)
//! weight(r) = alpha^2 / (alpha + r^2)^2
//! ```
//!
//! The loss is bounded above by `alpha`, so as `alpha` shrinks, far-away
//! residuals saturate and lose influence; as `alpha -> inf` the loss
//! approaches plain least squares. The weight is `d loss / d(r^2)`, i.e.
//! `weight(r) * r` is half the derivative of the loss in `r`, which is what
//! the inner weighted least-squares step (with its conventional `1/2`
//! factor) needs for a majorize-minimize descent.

/// One Geman-McClure loss term for a residual of norm `r`.
#[inline]
pub fn geman_mcclure_term(r: f64, alpha: f64) -> f64 {
    loss_from_sq(r * r, alpha)
}

/// One loss term from a squared residual norm.
#[inline]
pub(crate) fn loss_from_sq(r_sq: f64, alpha: f64) -> f64 {
    alpha * r_sq / (alpha + r_sq)
}

/// Total robust loss over a set of residual norms.
pub fn geman_mcclure_loss(residual_norms: &[f64], alpha: f64) -> f64 {
    assert!(alpha > 0.0, "alpha must be positive");
    residual_norms
        .iter()
        .map(|&r| geman_mcclure_term(r, alpha))
        .sum()
}

/// IRLS weight for a residual of norm `r`.
#[inline]
pub fn irls_weight(r: f64, alpha: f64) -> f64 {
    weight_from_sq(r * r, alpha)
}

/// IRLS weight from a squared residual norm.
#[inline]
pub(crate) fn weight_from_sq(r_sq: f64, alpha: f64) -> f64 {
    let denom = alpha + r_sq;
    (alpha / denom) * (alpha / denom)
}

/// IRLS weights for a set of residual norms. Weights are in `(0, 1]` and
/// never exactly zero: every correspondence keeps a say, however small.
pub fn irls_weights(residual_norms: &[f64], alpha: f64) -> Vec<f64> {
    assert!(alpha > 0.0, "alpha must be positive");
    residual_norms
        .iter()
        .map(|&r| irls_weight(r, alpha))
        .collect()
}

/// Samples `loss(r; alpha)` over a residual grid for each `alpha`, e.g. to
/// plot how annealing reshapes the objective. Returns `(alpha, r, loss)`
/// rows in grid order.
pub fn loss_profile(alphas: &[f64], residual_grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut rows = Vec::with_capacity(alphas.len() * residual_grid.len());
    for &alpha in alphas {
        for &r in residual_grid {
            rows.push((alpha, r, geman_mcclure_term(r, alpha)));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_residual_has_zero_loss_and_unit_weight() {
        assert_eq!(geman_mcclure_term(0.0, 0.7), 0.0);
        assert_eq!(irls_weight(0.0, 0.7), 1.0);
    }

    #[test]
    fn hand_computed_values() {
        // alpha = 1, r = 1: loss = 1/2, weight = 1/4.
        assert_relative_eq!(geman_mcclure_term(1.0, 1.0), 0.5);
        assert_relative_eq!(irls_weight(1.0, 1.0), 0.25);
        // alpha = 4, r = 2: loss = 4*4/8 = 2, weight = 16/64 = 1/4.
        assert_relative_eq!(geman_mcclure_term(2.0, 4.0), 2.0);
        assert_relative_eq!(irls_weight(2.0, 4.0), 0.25);
    }

    #[test]
    fn weight_times_r_is_half_the_loss_gradient() {
        // Central finite differences of the loss in r must equal
        // 2 * weight(r) * r to high relative accuracy.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let r = rng.random_range(0.05..10.0_f64);
            let alpha = rng.random_range(0.01..100.0_f64);
            let h = r * 1e-6;
            let fd =
                (geman_mcclure_term(r + h, alpha) - geman_mcclure_term(r - h, alpha)) / (2.0 * h);
            let analytic = 2.0 * irls_weight(r, alpha) * r;
            assert_relative_eq!(analytic, fd, max_relative = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn loss_term_bounded_by_alpha_and_r_squared(
            r in 0.0..100.0_f64,
            alpha in 1e-6..100.0_f64,
        ) {
            let term = geman_mcclure_term(r, alpha);
            prop_assert!(term <= alpha * (1.0 + 1e-12));
            prop_assert!(term <= r * r * (1.0 + 1e-12));
            prop_assert!(term >= 0.0);
        }

        #[test]
        fn loss_term_increases_with_alpha(
            r in 0.01..50.0_f64,
            alpha in 1e-4..10.0_f64,
            factor in 1.001..100.0_f64,
        ) {
            // Larger alpha makes the surrogate closer to plain least squares,
            // so each term can only grow.
            prop_assert!(geman_mcclure_term(r, alpha * factor) >= geman_mcclure_term(r, alpha));
        }

        #[test]
        fn weights_monotonically_decrease_in_residual(
            r in 0.0..50.0_f64,
            step in 0.001..10.0_f64,
            alpha in 1e-4..10.0_f64,
        ) {
            prop_assert!(irls_weight(r + step, alpha) < irls_weight(r, alpha));
        }

        #[test]
        fn weights_stay_in_unit_interval(
            r in 0.0..1e6_f64,
            alpha in 1e-9..1e6_f64,
        ) {
            let w = irls_weight(r, alpha);
            prop_assert!(w > 0.0, "weight must never vanish (w = {w})");
            prop_assert!(w <= 1.0);
        }
    }

    #[test]
    fn profile_covers_the_grid() {
        let rows = loss_profile(&[0.5, 2.0], &[0.0, 1.0, 3.0]);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], (0.5, 0.0, 0.0));
        assert_relative_eq!(rows[4].2, geman_mcclure_term(1.0, 2.0));
    }
}
