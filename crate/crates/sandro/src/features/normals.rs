use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::geometry::{KdTree, PointCloud, Vector3};

use super::FeatureError;

/// Neighbourhood used for the local plane fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighborhood {
    /// All points within this distance (inclusive).
    Radius(f64),
    /// The `k` nearest other points.
    Knn(usize),
}

/// Estimates a unit normal per point as the least-eigenvalue eigenvector of
/// the neighbourhood covariance (the local plane fit), oriented outward:
/// away from the cloud centroid.
///
/// Points with fewer than `min_neighbors` other points in their
/// neighbourhood get the all-zero marker normal and are skipped by
/// descriptor computation. The returned cloud shares the input points.
pub fn estimate_normals(
    cloud: &PointCloud,
    neighborhood: Neighborhood,
    min_neighbors: usize,
) -> Result<PointCloud, FeatureError> {
    match neighborhood {
        Neighborhood::Radius(r) if !(r.is_finite() && r > 0.0) => {
            return Err(FeatureError::InvalidRadius(r))
        }
        Neighborhood::Knn(0) => return Err(FeatureError::InvalidK(0)),
        _ => {}
    }
    if cloud.is_empty() {
        return Err(FeatureError::EmptyCloud);
    }
    let tree = KdTree::build(cloud).map_err(|_| FeatureError::EmptyCloud)?;
    let centroid = cloud.centroid().expect("non-empty cloud");
    let points = cloud.points();

    let normals: Vec<Vector3> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let neighbors: Vec<usize> = match neighborhood {
                Neighborhood::Radius(r) => tree
                    .within_radius(&points[i], r)
                    .into_iter()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, _)| j)
                    .collect(),
                Neighborhood::Knn(k) => tree
                    .knn(&points[i], k + 1)
                    .into_iter()
                    .filter(|&(j, _)| j != i)
                    .take(k)
                    .map(|(j, _)| j)
                    .collect(),
            };
            if neighbors.len() < min_neighbors {
                return Vector3::zeros();
            }
            // Covariance of the neighbourhood including the point itself.
            let mut mean = points[i].coords;
            for &j in &neighbors {
                mean += points[j].coords;
            }
            mean /= (neighbors.len() + 1) as f64;
            let mut cov = Matrix3::zeros();
            let mut accumulate = |c: Vector3| {
                let d = c - mean;
                cov += d * d.transpose();
            };
            accumulate(points[i].coords);
            for &j in &neighbors {
                accumulate(points[j].coords);
            }
            let eigen = cov.symmetric_eigen();
            let smallest = (0..3)
                .min_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]))
                .unwrap();
            let mut n: Vector3 = eigen.eigenvectors.column(smallest).into_owned();
            let len = n.norm();
            if !(len.is_finite() && len > 0.0) {
                return Vector3::zeros();
            }
            n /= len;
            orient_outward(&mut n, &(points[i].coords - centroid.coords));
            n
        })
        .collect();

    PointCloud::with_normals(points.to_vec(), normals).map_err(|_| FeatureError::EmptyCloud)
    // unreachable: normals are unit or zero
}

/// Flips `n` so it points away from the centroid. When the point sits on
/// (or numerically indistinguishable from) the plane through the centroid
/// orthogonal to `n`, the outward test is meaningless noise, so fall back
/// to a sign convention on the largest component to stay deterministic.
fn orient_outward(n: &mut Vector3, outward: &Vector3) {
    let dot = n.dot(outward);
    let noise_floor = 1e-12 * outward.norm();
    if dot.abs() <= noise_floor {
        let lead = (0..3)
            .max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
            .unwrap();
        if n[lead] < 0.0 {
            *n = -*n;
        }
    } else if dot < 0.0 {
        *n = -*n;
    }
}
