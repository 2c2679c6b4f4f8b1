use nalgebra::Matrix3;

use crate::geometry::{Point3, RigidTransform, Vector3};

use super::SolverError;

/// Closed-form weighted rigid alignment (Kabsch/Umeyama with weights).
///
/// Returns the transform `T = (R, t)` minimising
/// `sum_i w_i * || target_i - (R * source_i + t) ||^2`:
/// weighted centroids are subtracted, the 3x3 cross-covariance
/// `H = sum_i w_i (s_i - s̄)(t_i - t̄)^T` is decomposed as `H = U Σ V^T`,
/// and `R = V diag(1, 1, det(V U^T)) U^T` (the determinant factor guards
/// against reflections), with `t = t̄ - R s̄`.
///
/// Weights must be non-negative with a positive sum. Geometry whose
/// weighted covariance has rank < 2 (all mass collinear or on a single
/// point) does not determine a rotation and is rejected.
pub fn weighted_svd(
    source: &[Point3],
    target: &[Point3],
    weights: &[f64],
) -> Result<RigidTransform, SolverError> {
    assert_eq!(source.len(), target.len(), "paired slices must match");
    assert_eq!(source.len(), weights.len(), "one weight per pair");
    if source.len() < 3 {
        return Err(SolverError::InsufficientCorrespondences { got: source.len() });
    }
    let mut weight_sum = 0.0;
    for &w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(SolverError::NonFiniteInput);
        }
        weight_sum += w;
    }
    if weight_sum <= 0.0 {
        return Err(SolverError::ZeroWeightSum);
    }

    let mut s_bar = Vector3::zeros();
    let mut t_bar = Vector3::zeros();
    for ((s, t), &w) in source.iter().zip(target).zip(weights) {
        s_bar += w * s.coords;
        t_bar += w * t.coords;
    }
    s_bar /= weight_sum;
    t_bar /= weight_sum;

    let mut h = Matrix3::zeros();
    for ((s, t), &w) in source.iter().zip(target).zip(weights) {
        let ds = s.coords - s_bar;
        let dt = t.coords - t_bar;
        h += w * ds * dt.transpose();
    }
    if !h.iter().all(|v| v.is_finite()) {
        return Err(SolverError::NonFiniteInput);
    }

    let svd = h.svd(true, true);
    let sigma = svd.singular_values;
    // Rank check on the weighted cross-covariance: the second singular
    // value must carry real signal relative to the first.
    if sigma[0] <= 0.0 || sigma[1] <= sigma[0] * 1e-9 {
        return Err(SolverError::DegenerateGeometry {
            singular_values: [sigma[0], sigma[1], sigma[2]],
        });
    }
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let v = v_t.transpose();
    let det = (v * u.transpose()).determinant();
    let d = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, det.signum()));
    let rotation = v * d * u.transpose();
    let translation = t_bar - rotation * s_bar;
    RigidTransform::new(rotation, translation).map_err(|_| SolverError::DegenerateGeometry {
        singular_values: [sigma[0], sigma[1], sigma[2]],
    })
}

/// Weighted sum of squared residuals of `transform` on the given pairs;
/// the quantity minimised by [`weighted_svd`]. Exposed for tests and for
/// candidate comparison.
pub fn weighted_sse(
    source: &[Point3],
    target: &[Point3],
    weights: &[f64],
    transform: &RigidTransform,
) -> f64 {
    source
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((s, t), &w)| w * (t.coords - transform.apply_point(s).coords).norm_squared())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
        // Normalised 4-D Gaussian gives a uniform unit quaternion.
        let q = nalgebra::Quaternion::new(
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
        );
        UnitQuaternion::from_quaternion(q)
            .to_rotation_matrix()
            .into_inner()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect()
    }

    #[test]
    fn recovers_exact_transform_with_uniform_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let rot = random_rotation(&mut rng);
            let tr = Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let truth = RigidTransform::new(rot, tr).unwrap();
            let source = random_points(&mut rng, 30);
            let target: Vec<Point3> = source.iter().map(|p| truth.apply_point(p)).collect();
            let got = weighted_svd(&source, &target, &[1.0; 30]).unwrap();
            assert_relative_eq!(got.rotation(), truth.rotation(), epsilon = 1e-12);
            assert_relative_eq!(got.translation(), truth.translation(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_weight_removes_a_pair_entirely() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let truth =
            RigidTransform::new(random_rotation(&mut rng), Vector3::new(0.3, -0.1, 0.8)).unwrap();
        let source = random_points(&mut rng, 10);
        let mut target: Vec<Point3> = source.iter().map(|p| truth.apply_point(p)).collect();

        // Add a gross outlier pair with weight zero.
        let mut source_out = source.clone();
        source_out.push(Point3::new(5.0, 5.0, 5.0));
        target.push(Point3::new(-40.0, 12.0, 3.0));
        let mut weights = vec![1.0; 11];
        weights[10] = 0.0;

        let with_outlier = weighted_svd(&source_out, &target, &weights).unwrap();
        let without = weighted_svd(&source, &target[..10], &[1.0; 10]).unwrap();
        assert_relative_eq!(with_outlier.rotation(), without.rotation(), epsilon = 1e-9);
        assert_relative_eq!(
            with_outlier.translation(),
            without.translation(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn beats_random_candidates_on_noisy_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let source = random_points(&mut rng, 12);
            let target = random_points(&mut rng, 12); // unrelated clouds: worst case
            let weights: Vec<f64> = (0..12).map(|_| rng.random_range(0.05..1.0)).collect();
            let best = weighted_svd(&source, &target, &weights).unwrap();
            let best_sse = weighted_sse(&source, &target, &weights, &best);
            for _ in 0..1000 {
                let cand = RigidTransform::new(
                    random_rotation(&mut rng),
                    Vector3::new(
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                    ),
                )
                .unwrap();
                let sse = weighted_sse(&source, &target, &weights, &cand);
                assert!(
                    best_sse <= sse * (1.0 + 1e-12),
                    "candidate beat the closed form: {sse} < {best_sse}"
                );
            }
        }
    }

    #[test]
    fn never_returns_a_reflection() {
        // A nearly-mirrored pairing tempts the unconstrained optimum toward
        // det = -1; the determinant correction must keep det = +1.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let source = random_points(&mut rng, 15);
        let target: Vec<Point3> = source.iter().map(|p| Point3::new(-p.x, p.y, p.z)).collect();
        let got = weighted_svd(&source, &target, &[1.0; 15]).unwrap();
        assert_relative_eq!(got.rotation().determinant(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let source: Vec<Point3> = (0..10)
            .map(|i| Point3::new(i as f64 * 0.1, 0.0, 0.0))
            .collect();
        let target = source.clone();
        let err = weighted_svd(&source, &target, &[1.0; 10]).unwrap_err();
        assert!(matches!(err, SolverError::DegenerateGeometry { .. }));
    }

    #[test]
    fn all_weight_on_one_pair_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let source = random_points(&mut rng, 5);
        let target = random_points(&mut rng, 5);
        let mut weights = vec![0.0; 5];
        weights[2] = 1.0;
        assert!(matches!(
            weighted_svd(&source, &target, &weights),
            Err(SolverError::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let pts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            weighted_svd(&pts, &pts, &[1.0, 1.0]),
            Err(SolverError::InsufficientCorrespondences { got: 2 })
        ));
    }

    #[test]
    fn zero_weight_sum_is_an_error() {
        let pts = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert_eq!(
            weighted_svd(&pts, &pts, &[0.0, 0.0, 0.0]).unwrap_err(),
            SolverError::ZeroWeightSum
        );
    }
}
