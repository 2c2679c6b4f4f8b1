use super::{GeometryError, Point3, Vector3};

/// Tolerance on `| |n| - 1 |` for stored normals.
const NORMAL_LEN_TOL: f64 = 1e-6;

/// An ordered set of finite 3-D points with optional per-point normals.
///
/// Every stored normal is either unit length (within `1e-6`) or exactly
/// zero; the zero vector marks a point whose normal could not be estimated
/// (see [`crate::features::estimate_normals`]). Point order is significant:
/// correspondences and splitting operate on indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Vector3>>,
}

impl PointCloud {
    /// Builds a cloud without normals, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self, GeometryError> {
        if let Some(index) = points
            .iter()
            .position(|p| !p.coords.iter().all(|v| v.is_finite()))
        {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(Self {
            points,
            normals: None,
        })
    }

    /// Builds a cloud with one normal per point. Normals must be unit
    /// length within `1e-6` or exactly zero (the "invalid" marker).
    pub fn with_normals(points: Vec<Point3>, normals: Vec<Vector3>) -> Result<Self, GeometryError> {
        if normals.len() != points.len() {
            return Err(GeometryError::NormalCountMismatch {
                points: points.len(),
                normals: normals.len(),
            });
        }
        let mut cloud = Self::new(points)?;
        for (index, n) in normals.iter().enumerate() {
            if !n.iter().all(|v| v.is_finite()) {
                return Err(GeometryError::NonFinite { index });
            }
            let length = n.norm();
            if length != 0.0 && (length - 1.0).abs() > NORMAL_LEN_TOL {
                return Err(GeometryError::NonUnitNormal { index, length });
            }
        }
        cloud.normals = Some(normals);
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3]> {
        self.normals.as_deref()
    }

    /// True when the point has an estimated (non-zero) normal.
    pub fn has_valid_normal(&self, index: usize) -> bool {
        self.normals
            .as_ref()
            .map(|n| n[index] != Vector3::zeros())
            .unwrap_or(false)
    }

    /// Arithmetic mean of the points; `None` for an empty cloud.
    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(sum / self.points.len() as f64))
    }
}
