//! CLI failure type: every error carries a stable category string and exit
//! code so scripts can branch on outcomes without parsing prose.

use std::io;

use thiserror::Error;

use sandro::io::{MatchesCsvError, PlyError, TransformFileError};
use sandro::synthbench::SynthError;
use sandro::{FeatureError, GeometryError, SolverError, SplitError};

/// Exit codes: 2 config, 3 parse, 4 insufficient correspondences,
/// 5 degenerate geometry / solver failure, 6 filesystem.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration: bad field values, unknown keys, conflicting
    /// or out-of-range flags.
    #[error("{0}")]
    Config(String),
    /// A file was readable but its content is malformed (PLY cloud,
    /// transform file, matches CSV).
    #[error("{0}")]
    Parse(String),
    /// Fewer usable correspondences than a rigid fit needs.
    #[error("insufficient correspondences: {0}")]
    Insufficient(String),
    /// Solver could not produce a transform (degenerate geometry,
    /// non-finite input, every subcloud failed).
    #[error("{0}")]
    Degenerate(String),
    /// Filesystem-level failure (missing file, permissions, full disk).
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Parse(_) => "parse",
            CliError::Insufficient(_) => "insufficient-correspondences",
            CliError::Degenerate(_) => "degenerate",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Insufficient(_) => 4,
            CliError::Degenerate(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl From<PlyError> for CliError {
    fn from(e: PlyError) -> Self {
        match e {
            PlyError::Io(io) => CliError::Io(io),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<TransformFileError> for CliError {
    fn from(e: TransformFileError) -> Self {
        match e {
            TransformFileError::Io(io) => CliError::Io(io),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<MatchesCsvError> for CliError {
    fn from(e: MatchesCsvError) -> Self {
        match e {
            MatchesCsvError::Io(io) => CliError::Io(io),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidVoxelSize(_) => CliError::Config(e.to_string()),
            other => CliError::Degenerate(other.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InvalidRadius(_) | FeatureError::InvalidK(_) => {
                CliError::Config(e.to_string())
            }
            // Bad indices / duplicates come from user-supplied match files.
            FeatureError::IndexOutOfBounds { .. } | FeatureError::DuplicatePair { .. } => {
                CliError::Parse(e.to_string())
            }
            FeatureError::NoUsableDescriptors { .. } | FeatureError::EmptyCloud => {
                CliError::Insufficient(e.to_string())
            }
            other => CliError::Degenerate(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InsufficientCorrespondences { .. } => {
                CliError::Insufficient(e.to_string())
            }
            SolverError::InvalidConfig(_) => CliError::Config(e.to_string()),
            other => CliError::Degenerate(other.to_string()),
        }
    }
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::ZeroSplits => CliError::Config(e.to_string()),
            SplitError::TooFewCorrespondences { .. } => CliError::Insufficient(e.to_string()),
            SplitError::AllSplitsFailed { .. } => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Config(e.to_string())
    }
}
