//! Geometric features for correspondence generation: surface normals,
//! FPFH descriptors and reciprocal nearest-neighbour matching.

mod fpfh;
mod matching;
mod normals;

pub use fpfh::{compute_fpfh, FpfhDescriptor, FPFH_DIM};
pub use matching::{mutual_match, CorrespondenceSet};
pub use normals::{estimate_normals, Neighborhood};

/// Errors from feature estimation and matching.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("cloud has no normals; estimate normals first")]
    MissingNormals,
    #[error("invalid search radius {0}")]
    InvalidRadius(f64),
    #[error("invalid neighbour count k = {0}")]
    InvalidK(usize),
    #[error("operation requires a non-empty cloud")]
    EmptyCloud,
    #[error("no usable descriptors on the {side} side")]
    NoUsableDescriptors { side: &'static str },
    #[error("correspondence {side} index {index} out of bounds for cloud of {len} points")]
    IndexOutOfBounds {
        side: &'static str,
        index: usize,
        len: usize,
    },
    #[error("duplicate correspondence pair ({source_index}, {target_index})")]
    DuplicatePair {
        source_index: usize,
        target_index: usize,
    },
}
