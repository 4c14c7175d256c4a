use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::RunOutput;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Reproducibility record. Deliberately free of timestamps and host data so
/// identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub seed: u64,
    pub paths: usize,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn build_manifest(config: &ExperimentConfig, output: &RunOutput) -> Manifest {
    Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind: config.kind.as_str(),
        seed: config.seed,
        paths: config.paths,
        config_sha256: sha256_hex(config.to_canonical().as_bytes()),
        files: output
            .files
            .iter()
            .map(|(name, b)| FileEntry { name: name.clone(), bytes: b.len(), sha256: sha256_hex(b) })
            .collect(),
    }
}

/// Writes every file and `manifest.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, output: &RunOutput) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    for (name, bytes) in &output.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(path.display().to_string(), e))?;
    }
    let manifest = build_manifest(config, output);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = dir.join("manifest.json");
    std::fs::write(&path, json).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(manifest)
}
