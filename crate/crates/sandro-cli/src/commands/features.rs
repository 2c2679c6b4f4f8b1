//! `sandro features`: dump FPFH descriptors for one cloud, or reciprocal
//! best matches between two.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;

use sandro::io::{read_cloud, write_cloud_to, PlyFormat};
use sandro::{mutual_match, FpfhDescriptor, PointCloud, FPFH_DIM};

use crate::config::{CommonFlags, Preset, RunConfig};
use crate::error::CliError;
use crate::output::{emit, write_atomic};

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Cloud to describe (PLY).
    pub source: PathBuf,
    /// Optional second cloud; when present the output is the
    /// `src_idx,tgt_idx` CSV of reciprocal best matches between the two.
    pub target: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonFlags,
    /// Write the dump here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write the preprocessed cloud(s) as `<PREFIX>.source.ply` (and
    /// `.target.ply`), the clouds the dumped indices refer to.
    #[arg(long, value_name = "PREFIX")]
    pub save_clouds: Option<PathBuf>,
}

pub fn run(args: &FeaturesArgs) -> Result<(), CliError> {
    let config = RunConfig::resolve(&args.common, Preset::Scan)?;
    let source = read_cloud(&args.source)?;
    let (source_down, source_desc) = super::preprocess(&source, &config)?;

    let bytes = match &args.target {
        None => descriptors_csv(&source_desc).into_bytes(),
        Some(target_path) => {
            let target = read_cloud(target_path)?;
            let (target_down, target_desc) = super::preprocess(&target, &config)?;
            let matches = mutual_match(&source_desc, &target_desc)?;
            if let Some(prefix) = &args.save_clouds {
                save_cloud(prefix, "target", &target_down)?;
            }
            let mut csv = String::from("src_idx,tgt_idx\n");
            for &(i, j) in matches.pairs() {
                let _ = writeln!(csv, "{i},{j}");
            }
            csv.into_bytes()
        }
    };
    if let Some(prefix) = &args.save_clouds {
        save_cloud(prefix, "source", &source_down)?;
    }
    emit(args.out.as_deref(), &bytes)
}

fn descriptors_csv(descriptors: &[FpfhDescriptor]) -> String {
    let mut csv = String::from("index");
    for bin in 0..FPFH_DIM {
        let _ = write!(csv, ",b{bin:02}");
    }
    csv.push('\n');
    for (index, descriptor) in descriptors.iter().enumerate() {
        let _ = write!(csv, "{index}");
        for v in descriptor.as_slice() {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    csv
}

fn save_cloud(prefix: &Path, side: &str, cloud: &PointCloud) -> Result<(), CliError> {
    let mut path = prefix.as_os_str().to_owned();
    path.push(format!(".{side}.ply"));
    let mut bytes = Vec::new();
    write_cloud_to(cloud, PlyFormat::BinaryLittleEndian, &mut bytes)?;
    write_atomic(std::path::Path::new(&path), &bytes)
}
