//! Result records and failure-safe file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use sandro::RigidTransform;

use crate::config::RunConfig;
use crate::error::CliError;

/// The structured record `register` emits: the estimated transform plus
/// enough context (loss landscape, sizes, full config echo) to reproduce
/// and audit the run. The `transform` field round-trips through `eval` and
/// any transform-file consumer.
#[derive(Debug, Serialize)]
pub struct RegistrationResult {
    /// Estimated source-to-target motion, 16 row-major homogeneous numbers.
    pub transform: RigidTransform,
    /// Robust loss of the winning hypothesis on its own subcloud, at its
    /// final convexity parameter.
    pub final_loss: f64,
    pub num_correspondences: usize,
    pub num_splits: usize,
    /// Index of the winning subcloud.
    pub winner: usize,
    /// Selection score per subcloud (infinite where the solve failed).
    pub per_split_losses: Vec<f64>,
    pub wall_time_ms: f64,
    pub config: RunConfig,
}

/// Writes via a temp file in the target directory plus an atomic rename,
/// so a failed run never leaves a partial output file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Sends `bytes` to `path` atomically, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    bytes.push(b'\n');
    Ok(bytes)
}
