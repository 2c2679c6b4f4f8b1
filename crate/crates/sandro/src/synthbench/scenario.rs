use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::CorrespondenceSet;
use crate::geometry::{Point3, PointCloud, RigidTransform, Vector3};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("source cloud is empty")]
    EmptySource,
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
}

/// How the ground-truth rotation of each trial is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RotationMagnitude {
    /// Uniform over SO(3) (via uniform unit quaternions).
    UniformSo3,
    /// Uniformly random axis, fixed angle in degrees.
    FixedAngleDeg(f64),
}

/// A second, self-consistent rigid transform that a fraction of the
/// correspondences are rewired to satisfy exactly — the synthetic analogue
/// of a repeated or symmetric structure that supports a wrong alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyConfig {
    /// Fraction of all correspondences rewired to agree with `transform`.
    /// Must not exceed `outlier_rate` (decoys are carved out of the
    /// corrupted pairs).
    pub fraction: f64,
    pub transform: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Fraction of correspondences corrupted, in `[0, 1)`. Exactly
    /// `round(outlier_rate * N)` pairs are corrupted per trial.
    pub outlier_rate: f64,
    /// Isotropic Gaussian noise added to every target point (metres).
    pub inlier_noise_sigma: f64,
    pub rotation: RotationMagnitude,
    /// Ground-truth translations are uniform in ±extent per axis (metres).
    pub translation_extent: f64,
    /// Radius of the outlier projection sphere (metres).
    pub sphere_radius: f64,
    /// Projection centre; `None` uses the target-cloud centroid.
    pub sphere_center: Option<[f64; 3]>,
    /// Trials per scenario in a campaign.
    pub trials: usize,
    /// Master seed; per-trial seeds are derived from it.
    pub seed: u64,
    pub decoy: Option<DecoyConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            outlier_rate: 0.0,
            inlier_noise_sigma: 0.0,
            rotation: RotationMagnitude::UniformSo3,
            translation_extent: 2.0,
            sphere_radius: 1.0,
            sphere_center: None,
            trials: 40,
            seed: 0,
            decoy: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return bad(format!("outlier_rate {} not in [0, 1)", self.outlier_rate));
        }
        if !(self.inlier_noise_sigma.is_finite() && self.inlier_noise_sigma >= 0.0) {
            return bad(format!(
                "inlier_noise_sigma {} invalid",
                self.inlier_noise_sigma
            ));
        }
        if let RotationMagnitude::FixedAngleDeg(deg) = self.rotation {
            if !deg.is_finite() {
                return bad(format!("rotation angle {deg} invalid"));
            }
        }
        if !(self.translation_extent.is_finite() && self.translation_extent >= 0.0) {
            return bad(format!(
                "translation_extent {} invalid",
                self.translation_extent
            ));
        }
        if !(self.sphere_radius.is_finite() && self.sphere_radius > 0.0) {
            return bad(format!("sphere_radius {} invalid", self.sphere_radius));
        }
        if let Some(c) = self.sphere_center {
            if c.iter().any(|v| !v.is_finite()) {
                return bad(format!("sphere_center {c:?} invalid"));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(decoy) = &self.decoy {
            if !(decoy.fraction.is_finite() && decoy.fraction > 0.0) {
                return bad(format!("decoy fraction {} invalid", decoy.fraction));
            }
            if decoy.fraction > self.outlier_rate {
                return bad(format!(
                    "decoy fraction {} exceeds outlier_rate {}",
                    decoy.fraction, self.outlier_rate
                ));
            }
        }
        Ok(())
    }
}

/// One generated registration problem with its ground truth.
#[derive(Debug, Clone)]
pub struct TrialPair {
    pub source: PointCloud,
    pub target: PointCloud,
    /// Identity pairing: inliers are perfectly matched so the outlier
    /// fraction is exactly the controlled variable.
    pub correspondences: CorrespondenceSet,
    pub ground_truth: RigidTransform,
    /// Correspondence positions replaced by sphere projections (sorted).
    pub sphere_outliers: Vec<usize>,
    /// Correspondence positions rewired to the decoy transform (sorted).
    pub decoy_outliers: Vec<usize>,
    /// Centre actually used for the sphere projection.
    pub sphere_center: Point3,
}

/// Generates one source/target pair under `config`, deterministically in
/// `trial_seed`.
///
/// The target is the ground-truth transform of the source plus optional
/// Gaussian noise; `round(outlier_rate * N)` target points are then
/// corrupted by projection onto the sphere: `q ← c + r·(q − c)/‖q − c‖`
/// (a point landing on the centre is pushed in a random direction).
/// Without a decoy the corrupted positions are drawn uniformly at random.
/// With one, the layout is structured to mimic a repeated object: inlier
/// pairs occupy the head of the correspondence list, the corrupted tail
/// holds the decoy-consistent pairs with the sphere outliers strided
/// evenly through it.
pub fn generate_pair(
    source: &PointCloud,
    config: &ScenarioConfig,
    trial_seed: u64,
) -> Result<TrialPair, SynthError> {
    config.validate()?;
    let n = source.len();
    if n == 0 {
        return Err(SynthError::EmptySource);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let ground_truth = random_transform(&mut rng, config);

    let mut target: Vec<Point3> = source
        .points()
        .iter()
        .map(|p| ground_truth.apply_point(p))
        .collect();
    if config.inlier_noise_sigma > 0.0 {
        for q in &mut target {
            for axis in 0..3 {
                q[axis] += config.inlier_noise_sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    let center = match config.sphere_center {
        Some(c) => Point3::new(c[0], c[1], c[2]),
        None => {
            let sum = target.iter().fold(Vector3::zeros(), |a, q| a + q.coords);
            Point3::from(sum / n as f64)
        }
    };

    let n_corrupt = (config.outlier_rate * n as f64).round() as usize;
    let (mut sphere_outliers, decoy_outliers) = match &config.decoy {
        None => {
            let mut picked = rand::seq::index::sample(&mut rng, n, n_corrupt).into_vec();
            picked.sort_unstable();
            (picked, Vec::new())
        }
        Some(decoy) => {
            let n_decoy = (decoy.fraction * n as f64).round() as usize;
            let n_sphere = n_corrupt - n_decoy;
            let tail_start = n - n_corrupt;
            let mut sphere = Vec::with_capacity(n_sphere);
            let mut is_sphere = vec![false; n_corrupt];
            for j in 0..n_sphere {
                let offset = j * n_corrupt / n_sphere;
                is_sphere[offset] = true;
                sphere.push(tail_start + offset);
            }
            let decoys = (0..n_corrupt)
                .filter(|&o| !is_sphere[o])
                .map(|o| tail_start + o)
                .collect();
            (sphere, decoys)
        }
    };
    sphere_outliers.sort_unstable();

    if let Some(decoy) = &config.decoy {
        for &i in &decoy_outliers {
            target[i] = decoy.transform.apply_point(&source.points()[i]);
        }
    }
    for &i in &sphere_outliers {
        let delta = target[i] - center;
        let dist = delta.norm();
        let dir = if dist > 1e-12 {
            delta / dist
        } else {
            random_unit(&mut rng)
        };
        target[i] = center + dir * config.sphere_radius;
    }

    Ok(TrialPair {
        source: source.clone(),
        target: PointCloud::new(target).expect("corruption keeps points finite"),
        correspondences: CorrespondenceSet::identity(n),
        ground_truth,
        sphere_outliers,
        decoy_outliers,
        sphere_center: center,
    })
}

fn random_transform(rng: &mut ChaCha8Rng, config: &ScenarioConfig) -> RigidTransform {
    let rotation = match config.rotation {
        RotationMagnitude::UniformSo3 => {
            // A normalised Gaussian 4-vector is uniform on the quaternion
            // sphere, hence uniform over SO(3).
            let q = nalgebra::Quaternion::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            nalgebra::UnitQuaternion::from_quaternion(q)
                .to_rotation_matrix()
                .into_inner()
        }
        RotationMagnitude::FixedAngleDeg(deg) => {
            let axis = nalgebra::Unit::new_normalize(random_unit(rng));
            nalgebra::Rotation3::from_axis_angle(&axis, deg.to_radians()).into_inner()
        }
    };
    let e = config.translation_extent;
    let translation = if e > 0.0 {
        Vector3::new(
            rng.random_range(-e..=e),
            rng.random_range(-e..=e),
            rng.random_range(-e..=e),
        )
    } else {
        Vector3::zeros()
    };
    RigidTransform::new(rotation, translation).expect("sampled rotation is orthonormal")
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3 {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let norm = v.norm();
        if norm > 1e-9 {
            return v / norm;
        }
    }
}
