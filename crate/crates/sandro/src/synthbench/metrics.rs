use crate::geometry::{RigidTransform, Vector3};

/// Angle of the relative rotation between two transforms, in degrees.
///
/// Computed as `atan2(||sin θ · axis||, cos θ)` from the skew part and the
/// trace of `Ra^T · Rb`. Unlike the plain `acos((tr - 1) / 2)` form, this
/// stays numerically exact for near-identical rotations, where the arccos
/// of a trace one ulp below 3 would already report ~1e-6 degrees.
pub fn rotation_error_deg(a: &RigidTransform, b: &RigidTransform) -> f64 {
    let rel = a.rotation().transpose() * b.rotation();
    let sin_axis = 0.5
        * Vector3::new(
            rel[(2, 1)] - rel[(1, 2)],
            rel[(0, 2)] - rel[(2, 0)],
            rel[(1, 0)] - rel[(0, 1)],
        );
    let cos = (rel.trace() - 1.0) * 0.5;
    sin_axis.norm().atan2(cos).to_degrees()
}

/// Euclidean distance between the two translation vectors, in the input
/// unit (metres throughout this crate).
pub fn translation_error_m(a: &RigidTransform, b: &RigidTransform) -> f64 {
    (a.translation() - b.translation()).norm()
}
