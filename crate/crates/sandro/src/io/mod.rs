//! File formats: PLY point clouds, plain-text transforms, and
//! correspondence CSV.

mod matches_csv;
mod ply;
mod transform_file;

pub use matches_csv::{
    parse_matches_csv, read_matches, write_matches, write_matches_to, MatchesCsvError,
};
pub use ply::{parse_ply, read_cloud, write_cloud, write_cloud_to, PlyError, PlyFormat};
pub use transform_file::{
    parse_transform_text, read_transform, write_transform, write_transform_to, TransformFileError,
};
