//! Point clouds, rigid transforms and spatial queries.

mod cloud;
mod kdtree;
mod transform;
mod voxel;

pub use cloud::PointCloud;
pub use kdtree::KdTree;
pub use transform::RigidTransform;
pub use voxel::voxel_downsample;

/// 3-D point with `f64` coordinates.
pub type Point3 = nalgebra::Point3<f64>;
/// 3-D vector with `f64` components.
pub type Vector3 = nalgebra::Vector3<f64>;

/// Errors from cloud construction, transform validation and spatial queries.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    /// A coordinate or normal component is NaN or infinite.
    #[error("non-finite value at point index {index}")]
    NonFinite { index: usize },
    /// Normal buffer length does not match the point buffer.
    #[error("normal count {normals} does not match point count {points}")]
    NormalCountMismatch { points: usize, normals: usize },
    /// A normal is neither unit length (within 1e-6) nor the all-zero
    /// "invalid" marker.
    #[error("normal at index {index} has length {length}, expected 1 or 0")]
    NonUnitNormal { index: usize, length: f64 },
    /// Rotation block failed the orthogonality / determinant check.
    #[error("matrix is not a rotation: max |R^T R - I| = {ortho_residual:.3e}, det = {det}")]
    NotARotation { ortho_residual: f64, det: f64 },
    /// Homogeneous matrix does not have the form [R t; 0 1].
    #[error("matrix is not a homogeneous rigid transform: bottom row {0:?}")]
    BadHomogeneousRow([f64; 4]),
    /// Spatial query against an empty cloud.
    #[error("operation requires a non-empty cloud")]
    EmptyCloud,
    /// Voxel size must be positive and finite.
    #[error("invalid voxel size {0}")]
    InvalidVoxelSize(f64),
}
