//! Directory layouts shared by the commands, and the manifest that closes
//! every output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dynrecon_core::sim::{PhantomSpec, SimulatedDataset};
use dynrecon_core::solver::ChunkSummary;
use dynrecon_core::{Image, ImageSequence, KSpaceData, MethodSpec, SamplingPattern, SubgradientField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::pgm::PgmRange;
use crate::rawio::{self, hash_file, read_json, write_json};

pub const PHANTOM: &str = "phantom.json";
pub const TRUTH: &str = "truth.c64";
pub const PRIOR_TRUTH: &str = "prior_truth.c64";
pub const PRIOR_KSPACE: &str = "prior_kspace.c64";
pub const PRIOR_PATTERN: &str = "prior_pattern.json";
pub const KSPACE: &str = "kspace.c64";
pub const PATTERN: &str = "pattern.json";
pub const U0: &str = "u0.c64";
pub const SUBGRADIENT: &str = "q0.c64";
pub const RECON: &str = "recon.c64";
pub const RUN: &str = "run.json";
pub const CONVERGENCE: &str = "convergence.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct Dataset {
    pub phantom: PhantomSpec,
    pub prior_truth: Image,
    pub truth: ImageSequence,
    pub prior_data: KSpaceData,
    pub data: KSpaceData,
}

pub fn save_dataset(dir: &Path, phantom: &PhantomSpec, ds: &SimulatedDataset) -> Result<()> {
    write_json(&dir.join(PHANTOM), phantom)?;
    rawio::write_sequence(&dir.join(TRUTH), &ds.truth)?;
    rawio::write_image(&dir.join(PRIOR_TRUTH), &ds.prior_truth)?;
    rawio::write_kspace(&dir.join(PRIOR_KSPACE), &ds.prior_data)?;
    write_json(&dir.join(PRIOR_PATTERN), ds.prior_data.pattern())?;
    rawio::write_kspace(&dir.join(KSPACE), &ds.data)?;
    write_json(&dir.join(PATTERN), ds.data.pattern())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    if !dir.join(MANIFEST).is_file() {
        return Err(CliError::Missing(format!("{} is not a dataset directory", dir.display())));
    }
    let phantom: PhantomSpec = read_json(&dir.join(PHANTOM))?;
    let pattern: SamplingPattern = read_json(&dir.join(PATTERN))?;
    let prior_pattern: SamplingPattern = read_json(&dir.join(PRIOR_PATTERN))?;
    Ok(Dataset {
        phantom,
        prior_truth: rawio::read_image(&dir.join(PRIOR_TRUTH))?,
        truth: rawio::read_sequence(&dir.join(TRUTH))?,
        prior_data: rawio::read_kspace(&dir.join(PRIOR_KSPACE), prior_pattern)?,
        data: rawio::read_kspace(&dir.join(KSPACE), pattern)?,
    })
}

pub fn load_subgradient(prior_dir: &Path) -> Result<SubgradientField> {
    let path = prior_dir.join(SUBGRADIENT);
    if !path.is_file() {
        return Err(CliError::Missing(format!("no subgradient at {}", path.display())));
    }
    rawio::read_subgradient(&path)
}

/// Metadata of one reconstruction, written as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: MethodSpec,
    pub converged: bool,
    pub chunks: Vec<ChunkSummary>,
}

pub struct RunResult {
    pub label: String,
    pub sequence: ImageSequence,
    pub record: RunRecord,
}

/// Label is the directory name.
pub fn load_result(dir: &Path) -> Result<RunResult> {
    if !dir.join(RUN).is_file() {
        return Err(CliError::Missing(format!("{} is not a result directory", dir.display())));
    }
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".into());
    Ok(RunResult { label, sequence: rawio::read_sequence(&dir.join(RECON))?, record: read_json(&dir.join(RUN))? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<PgmRange>,
}

/// Content hashes of everything a command read and wrote. Paths are relative
/// to the output directory; inputs are keyed by role, so the manifest does
/// not depend on where the inputs live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub settings: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, FileEntry>,
}

#[derive(Debug, Default)]
pub struct Inputs(BTreeMap<String, String>);

impl Inputs {
    pub fn add(&mut self, role: impl Into<String>, path: &Path) -> Result<()> {
        self.0.insert(role.into(), hash_file(path)?);
        Ok(())
    }
}

/// Hashes every file under `dir` (except an existing manifest) and writes
/// `manifest.json`.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    settings: serde_json::Value,
    inputs: Inputs,
    ranges: &BTreeMap<String, PgmRange>,
) -> Result<Manifest> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let mut outputs = BTreeMap::new();
    for rel in files {
        if rel == MANIFEST {
            continue;
        }
        let sha256 = hash_file(&dir.join(&rel))?;
        let range = ranges.get(&rel).copied();
        outputs.insert(rel, FileEntry { sha256, range });
    }
    let manifest = Manifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        settings,
        inputs: inputs.0,
        outputs,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path: PathBuf = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under root");
            out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
        }
    }
    Ok(())
}
