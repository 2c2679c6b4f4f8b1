use std::collections::BTreeMap;

use super::{GeometryError, Point3, PointCloud, Vector3};

/// Voxel-grid downsampling: one output point per occupied voxel, equal to
/// the centroid of the points that fell into it.
///
/// Voxel indices are `floor(coord / voxel_size)` per axis, so a point lying
/// exactly on a voxel boundary belongs to the higher-index voxel. Output
/// points are ordered by ascending lexicographic voxel index `(ix, iy, iz)`,
/// which makes the result independent of input order up to centroid
/// summation. Normals are not carried over; estimate them afterwards.
pub fn voxel_downsample(cloud: &PointCloud, voxel_size: f64) -> Result<PointCloud, GeometryError> {
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(GeometryError::InvalidVoxelSize(voxel_size));
    }
    let mut cells: BTreeMap<(i64, i64, i64), (Vector3, usize)> = BTreeMap::new();
    for p in cloud.points() {
        let key = (
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        );
        let cell = cells.entry(key).or_insert((Vector3::zeros(), 0));
        cell.0 += p.coords;
        cell.1 += 1;
    }
    let points = cells
        .into_values()
        .map(|(sum, count)| Point3::from(sum / count as f64))
        .collect();
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn clusters_collapse_to_centroids() {
        // Two clusters well inside distinct voxels.
        let cloud = PointCloud::new(vec![
            Point3::new(0.01, 0.01, 0.01),
            Point3::new(0.03, 0.01, 0.01),
            Point3::new(0.92, 0.01, 0.01),
        ])
        .unwrap();
        let down = voxel_downsample(&cloud, 0.1).unwrap();
        assert_eq!(down.len(), 2);
        assert_relative_eq!(down.points()[0], Point3::new(0.02, 0.01, 0.01));
        assert_relative_eq!(down.points()[1], Point3::new(0.92, 0.01, 0.01));
    }

    #[test]
    fn boundary_point_goes_to_higher_voxel() {
        // 0.1 / 0.05 == 2.0 exactly, so the point sits on the boundary
        // between voxel 1 and voxel 2 and must land in voxel 2.
        let cloud = PointCloud::new(vec![
            Point3::new(0.1, 0.0, 0.0),
            Point3::new(0.11, 0.0, 0.0),
            Point3::new(0.09, 0.0, 0.0),
        ])
        .unwrap();
        let down = voxel_downsample(&cloud, 0.05).unwrap();
        assert_eq!(down.len(), 2);
        // Voxel 1 holds only 0.09; voxel 2 averages 0.1 and 0.11.
        assert_relative_eq!(down.points()[0].x, 0.09);
        assert_relative_eq!(down.points()[1].x, 0.105);
    }

    #[test]
    fn negative_coordinates_floor_correctly() {
        let cloud = PointCloud::new(vec![
            Point3::new(-0.01, 0.0, 0.0),
            Point3::new(0.01, 0.0, 0.0),
        ])
        .unwrap();
        let down = voxel_downsample(&cloud, 0.1).unwrap();
        // -0.01 is in voxel -1, 0.01 in voxel 0: no merging.
        assert_eq!(down.len(), 2);
        assert!(
            down.points()[0].x < down.points()[1].x,
            "sorted by voxel index"
        );
    }

    #[test]
    fn matches_bucket_oracle_on_random_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Point3> = (0..400)
            .map(|_| {
                Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let voxel = 0.23;
        // Independent bucketing oracle over a hash map.
        let mut buckets: HashMap<(i64, i64, i64), Vec<Point3>> = HashMap::new();
        for p in &pts {
            let key = (
                (p.x / voxel).floor() as i64,
                (p.y / voxel).floor() as i64,
                (p.z / voxel).floor() as i64,
            );
            buckets.entry(key).or_default().push(*p);
        }
        let mut expect: Vec<((i64, i64, i64), Point3)> = buckets
            .into_iter()
            .map(|(key, members)| {
                let sum = members
                    .iter()
                    .fold(Vector3::zeros(), |acc, p| acc + p.coords);
                (key, Point3::from(sum / members.len() as f64))
            })
            .collect();
        expect.sort_by_key(|(key, _)| *key);

        let down = voxel_downsample(&PointCloud::new(pts).unwrap(), voxel).unwrap();
        assert_eq!(down.len(), expect.len());
        for (got, (_, want)) in down.points().iter().zip(&expect) {
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
        // Every centroid must lie inside its own voxel.
        for p in down.points() {
            for a in 0..3 {
                let cell = (p.coords[a] / voxel).floor();
                assert!(p.coords[a] >= cell * voxel && p.coords[a] < (cell + 1.0) * voxel);
            }
        }
    }

    #[test]
    fn rejects_non_positive_voxel() {
        let cloud = PointCloud::new(vec![Point3::origin()]).unwrap();
        assert!(voxel_downsample(&cloud, 0.0).is_err());
        assert!(voxel_downsample(&cloud, -1.0).is_err());
        assert!(voxel_downsample(&cloud, f64::NAN).is_err());
    }
}
