use rayon::prelude::*;

use crate::geometry::{KdTree, PointCloud, Vector3};

use super::FeatureError;

/// Bins per angular feature.
const BINS: usize = 11;
/// Dimensionality of the full descriptor: three concatenated histograms.
pub const FPFH_DIM: usize = 3 * BINS;

/// Fast Point Feature Histogram: concatenated 11-bin histograms of the
/// three pair angles `(alpha, phi, theta)`, each normalised to sum 100.
///
/// A descriptor of all zeros marks a point that had no valid normal or no
/// usable neighbour pairs; such points are skipped when matching.
#[derive(Debug, Clone, PartialEq)]
pub struct FpfhDescriptor {
    values: [f64; FPFH_DIM],
}

impl FpfhDescriptor {
    fn zeros() -> Self {
        Self {
            values: [0.0; FPFH_DIM],
        }
    }

    /// Direct constructor for tests that need synthetic descriptors.
    #[cfg(test)]
    pub(crate) fn from_values(values: [f64; FPFH_DIM]) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// False for the all-zero marker descriptor.
    pub fn is_usable(&self) -> bool {
        self.values.iter().any(|&v| v != 0.0)
    }

    /// Squared Euclidean distance between descriptors.
    pub fn distance_sq(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// The three pair angles of the Darboux frame between two oriented points.
///
/// The pair is ordered so the source is the point whose normal is better
/// aligned with the connecting line (larger `|cos|`); `u` is the source
/// normal, `v = d̂ × u` (normalised), `w = u × v`, giving
/// `alpha = v·n_t` in [-1, 1], `phi = u·d̂` in [-1, 1] and
/// `theta = arctan((w·n_t)/(u·n_t))` in [-pi/2, pi/2].
///
/// Returns `None` when the geometry is degenerate: coincident points, or a
/// source normal parallel to the connecting line (undefined frame).
fn pair_angles(p1: &Vector3, n1: &Vector3, p2: &Vector3, n2: &Vector3) -> Option<(f64, f64, f64)> {
    let mut d = p2 - p1;
    let dist = d.norm();
    if dist == 0.0 {
        return None;
    }
    d /= dist;
    let (u, n_t) = if n1.dot(&d).abs() >= n2.dot(&d).abs() {
        (*n1, *n2)
    } else {
        d = -d;
        (*n2, *n1)
    };
    let v_raw = d.cross(&u);
    let v_len = v_raw.norm();
    if v_len < 1e-12 {
        return None;
    }
    let v = v_raw / v_len;
    let w = u.cross(&v);
    let alpha = v.dot(&n_t);
    let phi = u.dot(&d);
    let mut theta = (w.dot(&n_t) / u.dot(&n_t)).atan();
    if !theta.is_finite() {
        theta = 0.0; // 0/0: target normal parallel to v
    }
    Some((alpha, phi, theta))
}

/// Linear bin over `[lo, hi]`; interior boundary values go to the upper
/// bin, the final boundary stays in the last bin.
#[inline]
fn bin_index(x: f64, lo: f64, hi: f64) -> usize {
    let t = ((x - lo) / (hi - lo) * BINS as f64).floor();
    (t.max(0.0) as usize).min(BINS - 1)
}

type Spfh = [f64; FPFH_DIM];

fn spfh_accumulate(hist: &mut Spfh, alpha: f64, phi: f64, theta: f64) {
    hist[bin_index(alpha, -1.0, 1.0)] += 1.0;
    hist[BINS + bin_index(phi, -1.0, 1.0)] += 1.0;
    hist[2 * BINS
        + bin_index(
            theta,
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
        )] += 1.0;
}

/// Computes FPFH descriptors for every point of a cloud with normals.
///
/// Two passes over inclusive `radius` neighbourhoods: first a simplified
/// histogram (SPFH) per point from its pair angles with each neighbour,
/// then the distance-weighted blend
/// `FPFH_i = SPFH_i + (1/k) * Σ_j SPFH_j / ||p_i - p_j||`,
/// after which each 11-bin block is renormalised to sum 100. Neighbours
/// without a valid normal (and coincident duplicates) are excluded; points
/// with no valid normal or no contributing pairs get the all-zero marker.
pub fn compute_fpfh(cloud: &PointCloud, radius: f64) -> Result<Vec<FpfhDescriptor>, FeatureError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(FeatureError::InvalidRadius(radius));
    }
    let normals = cloud.normals().ok_or(FeatureError::MissingNormals)?;
    if cloud.is_empty() {
        return Ok(Vec::new());
    }
    let tree = KdTree::build(cloud).map_err(|_| FeatureError::EmptyCloud)?;
    let points = cloud.points();
    let valid = |i: usize| cloud.has_valid_normal(i);

    // Neighbour lists are shared by both passes.
    let neighborhoods: Vec<Vec<(usize, f64)>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            tree.within_radius(&points[i], radius)
                .into_iter()
                .filter(|&(j, d)| j != i && d > 0.0 && valid(j))
                .collect()
        })
        .collect();

    let spfh: Vec<Spfh> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut hist = [0.0; FPFH_DIM];
            if !valid(i) {
                return hist;
            }
            for &(j, _) in &neighborhoods[i] {
                if let Some((alpha, phi, theta)) = pair_angles(
                    &points[i].coords,
                    &normals[i],
                    &points[j].coords,
                    &normals[j],
                ) {
                    spfh_accumulate(&mut hist, alpha, phi, theta);
                }
            }
            hist
        })
        .collect();

    let descriptors: Vec<FpfhDescriptor> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            if !valid(i) {
                return FpfhDescriptor::zeros();
            }
            let mut blended = spfh[i];
            let k = neighborhoods[i].len();
            if k > 0 {
                let inv_k = 1.0 / k as f64;
                for &(j, d) in &neighborhoods[i] {
                    let w = inv_k / d;
                    for (acc, v) in blended.iter_mut().zip(&spfh[j]) {
                        *acc += w * v;
                    }
                }
            }
            // Renormalise each angular block to sum 100.
            for block in 0..3 {
                let range = block * BINS..(block + 1) * BINS;
                let sum: f64 = blended[range.clone()].iter().sum();
                if sum > 0.0 {
                    let scale = 100.0 / sum;
                    for v in &mut blended[range] {
                        *v *= scale;
                    }
                }
            }
            FpfhDescriptor { values: blended }
        })
        .collect();

    Ok(descriptors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{estimate_normals, Neighborhood};
    use crate::geometry::{Point3, RigidTransform};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points_with_parallel_normals_across_the_line() {
        // Both normals +z, connecting line along x: by hand,
        // alpha = v·n_t = 0, phi = u·d̂ = 0, theta = atan(0/1) = 0.
        // All three angles sit in the middle bin (index 5), so after
        // normalisation each block is 100 in bin 5.
        let points = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.2, 0.0, 0.0)];
        let normals = vec![Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, 1.0)];
        let cloud = PointCloud::with_normals(points, normals).unwrap();
        let desc = compute_fpfh(&cloud, 0.5).unwrap();
        for d in &desc {
            assert!(d.is_usable());
            for block in 0..3 {
                for bin in 0..BINS {
                    let expected = if bin == 5 { 100.0 } else { 0.0 };
                    assert_relative_eq!(d.as_slice()[block * BINS + bin], expected);
                }
            }
        }
    }

    #[test]
    fn normals_along_the_connecting_line_are_degenerate() {
        // The Darboux frame needs d̂ × u ≠ 0; normals parallel to the line
        // leave no usable pair, so both descriptors are the zero marker.
        let points = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.2, 0.0, 0.0)];
        let normals = vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)];
        let cloud = PointCloud::with_normals(points, normals).unwrap();
        let desc = compute_fpfh(&cloud, 0.5).unwrap();
        assert!(desc.iter().all(|d| !d.is_usable()));
    }

    #[test]
    fn blocks_sum_to_one_hundred() {
        let cloud = random_shell_cloud(300, 71);
        let desc = compute_fpfh(&cloud, 0.6).unwrap();
        let mut usable = 0;
        for d in &desc {
            if !d.is_usable() {
                continue;
            }
            usable += 1;
            for block in 0..3 {
                let sum: f64 = d.as_slice()[block * BINS..(block + 1) * BINS].iter().sum();
                assert_relative_eq!(sum, 100.0, epsilon = 1e-6);
            }
        }
        assert!(usable > 250, "only {usable} usable descriptors");
    }

    #[test]
    fn isolated_point_gets_zero_descriptor() {
        let mut cloud = random_shell_cloud(100, 72);
        let mut points = cloud.points().to_vec();
        let mut normals = cloud.normals().unwrap().to_vec();
        points.push(Point3::new(50.0, 50.0, 50.0));
        normals.push(Vector3::new(0.0, 0.0, 1.0));
        cloud = PointCloud::with_normals(points, normals).unwrap();
        let desc = compute_fpfh(&cloud, 0.6).unwrap();
        assert!(!desc[100].is_usable());
    }

    #[test]
    fn missing_normals_is_an_error() {
        let cloud = PointCloud::new(vec![Point3::origin()]).unwrap();
        assert_eq!(
            compute_fpfh(&cloud, 0.5).unwrap_err(),
            FeatureError::MissingNormals
        );
    }

    #[test]
    fn descriptors_are_invariant_under_rigid_motion() {
        let cloud = random_shell_cloud(200, 73);
        let base = compute_fpfh(&cloud, 0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for _ in 0..5 {
            let q = nalgebra::Quaternion::new(
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
            );
            let rot = nalgebra::UnitQuaternion::from_quaternion(q)
                .to_rotation_matrix()
                .into_inner();
            let motion = RigidTransform::new(
                rot,
                Vector3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ),
            )
            .unwrap();
            let moved = compute_fpfh(&motion.apply(&cloud), 0.6).unwrap();
            for (a, b) in base.iter().zip(&moved) {
                for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                    assert!((x - y).abs() < 1e-6, "bin moved: {x} vs {y}");
                }
            }
        }
    }

    /// Random points on a unit shell with slight radial jitter and exact
    /// radial normals — a cloud where every descriptor is well defined.
    fn random_shell_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for _ in 0..n {
            let dir = Vector3::new(
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
            )
            .normalize();
            points.push(Point3::from(dir * rng.random_range(0.9..1.1)));
            normals.push(dir);
        }
        PointCloud::with_normals(points, normals).unwrap()
    }

    #[test]
    fn estimated_normals_feed_fpfh_end_to_end() {
        let cloud = random_shell_cloud(250, 75);
        let bare = PointCloud::new(cloud.points().to_vec()).unwrap();
        let with_normals = estimate_normals(&bare, Neighborhood::Knn(10), 3).unwrap();
        let desc = compute_fpfh(&with_normals, 0.6).unwrap();
        assert!(desc.iter().filter(|d| d.is_usable()).count() > 200);
    }
}
