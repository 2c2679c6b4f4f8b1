use nalgebra::{Matrix3, Matrix4};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GeometryError, Point3, PointCloud, Vector3};

/// Maximum allowed orthogonality / determinant defect for a rotation block.
const ROTATION_TOL: f64 = 1e-9;

/// A proper rigid motion of 3-D space: rotation followed by translation.
///
/// The rotation block is validated at every construction site (including
/// deserialisation): `R^T R = I` and `det R = 1`, both within `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3,
}

impl RigidTransform {
    /// Builds a transform, validating that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3) -> Result<Self, GeometryError> {
        let ortho_residual = (rotation.transpose() * rotation - Matrix3::identity())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let det = rotation.determinant();
        if !ortho_residual.is_finite()
            || ortho_residual > ROTATION_TOL
            || (det - 1.0).abs() > ROTATION_TOL
        {
            return Err(GeometryError::NotARotation {
                ortho_residual,
                det,
            });
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index: 0 });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// The identity motion.
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3 {
        &self.translation
    }

    /// Applies the motion to a single point.
    #[inline]
    pub fn apply_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    /// Rotates a direction vector (no translation).
    #[inline]
    pub fn rotate_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// Applies the motion to every point of a cloud; normals, when present,
    /// are rotated.
    pub fn apply(&self, cloud: &PointCloud) -> PointCloud {
        let points = cloud.points().iter().map(|p| self.apply_point(p)).collect();
        match cloud.normals() {
            Some(normals) => {
                let normals = normals.iter().map(|n| self.rotation * n).collect();
                PointCloud::with_normals(points, normals).expect("rotation preserves normal length")
            }
            None => PointCloud::new(points).expect("rigid motion preserves finiteness"),
        }
    }

    /// Composition `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// The inverse motion.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Row-major 4x4 homogeneous matrix `[R t; 0 0 0 1]`.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Row-major flattening of [`Self::to_homogeneous`], as stored in
    /// transform files and JSON records.
    pub fn to_row_major(&self) -> [f64; 16] {
        let m = self.to_homogeneous();
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = m[(r, c)];
            }
        }
        out
    }

    /// Parses a row-major homogeneous matrix.
    ///
    /// The bottom row must be `0 0 0 1` within `1e-6` and the rotation block
    /// orthogonal with unit determinant within `1e-6`. A block that already
    /// satisfies the strict `1e-9` invariant is kept bit-exact (so files
    /// written by this library round-trip); anything between the two
    /// tolerances is projected onto the nearest exact rotation.
    pub fn from_row_major(values: &[f64; 16]) -> Result<Self, GeometryError> {
        let bottom = [values[12], values[13], values[14], values[15]];
        let bottom_ok = bottom[0].abs() <= 1e-6
            && bottom[1].abs() <= 1e-6
            && bottom[2].abs() <= 1e-6
            && (bottom[3] - 1.0).abs() <= 1e-6;
        if !bottom_ok || values.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::BadHomogeneousRow(bottom));
        }
        let rotation = Matrix3::new(
            values[0], values[1], values[2], //
            values[4], values[5], values[6], //
            values[8], values[9], values[10],
        );
        let ortho_residual = (rotation.transpose() * rotation - Matrix3::identity())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let det = rotation.determinant();
        if ortho_residual > 1e-6 || (det - 1.0).abs() > 1e-6 {
            return Err(GeometryError::NotARotation {
                ortho_residual,
                det,
            });
        }
        let translation = Vector3::new(values[3], values[7], values[11]);
        if ortho_residual <= ROTATION_TOL && (det - 1.0).abs() <= ROTATION_TOL {
            return Self::new(rotation, translation);
        }
        Self::new(nearest_rotation(&rotation), translation)
    }
}

/// Projects a near-rotation onto the closest proper rotation (Frobenius
/// norm) via SVD with a determinant correction.
fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

impl Serialize for RigidTransform {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_row_major().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RigidTransform {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = <[f64; 16]>::deserialize(deserializer)?;
        Self::from_row_major(&values).map_err(D::Error::custom)
    }
}
