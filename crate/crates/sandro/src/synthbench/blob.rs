use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Point3, PointCloud, Vector3};

const RAW_POINTS: usize = 5000;
const SEED: u64 = 0x53414E44;

/// Procedural stand-in for a real scan: ~5000 points sampled on the
/// surface of two loosely symmetric, slightly wobbled ellipsoid lobes,
/// about half a metre across. Deterministic — every call returns the same
/// cloud — so benchmarks built on it are self-contained.
///
/// Downsampling with a 0.02 m voxel grid leaves roughly 1500 points, the
/// correspondence count the synthetic benchmarks target.
pub fn builtin_source_cloud() -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // (center, semi-axes, selection probability weight)
    let lobes = [
        (
            Vector3::new(-0.17, 0.0, 0.0),
            Vector3::new(0.121, 0.098, 0.251),
        ),
        (
            Vector3::new(0.17, 0.02, 0.03),
            Vector3::new(0.107, 0.102, 0.233),
        ),
    ];
    let mut points = Vec::with_capacity(RAW_POINTS);
    for _ in 0..RAW_POINTS {
        let (center, axes) = lobes[usize::from(!rng.random_bool(0.55))];
        let dir = random_unit(&mut rng);
        // A smooth angular wobble breaks the exact ellipsoid symmetry and
        // gives surface descriptors structure to latch onto.
        let phi = dir.y.atan2(dir.x);
        let theta = dir.z.clamp(-1.0, 1.0).acos();
        let wobble =
            1.0 + 0.08 * (3.0 * theta).sin() * (2.0 * phi).cos() + 0.04 * (5.0 * theta).cos();
        points.push(Point3::from(center + axes.component_mul(&dir) * wobble));
    }
    PointCloud::new(points).expect("procedural points are finite")
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3 {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}
