pub mod bench;
pub mod eval;
pub mod features;
pub mod register;

use sandro::{
    compute_fpfh, estimate_normals, voxel_downsample, FpfhDescriptor, Neighborhood, PointCloud,
};

use crate::config::RunConfig;
use crate::error::CliError;

/// Shared front half of the pipeline: downsample (unless voxel is 0),
/// estimate normals, compute descriptors.
pub fn preprocess(
    cloud: &PointCloud,
    config: &RunConfig,
) -> Result<(PointCloud, Vec<FpfhDescriptor>), CliError> {
    let down = if config.voxel_size > 0.0 {
        voxel_downsample(cloud, config.voxel_size)?
    } else {
        cloud.clone()
    };
    let with_normals = estimate_normals(&down, Neighborhood::Radius(config.normal_radius), 3)?;
    let descriptors = compute_fpfh(&with_normals, config.feature_radius)?;
    Ok((with_normals, descriptors))
}
