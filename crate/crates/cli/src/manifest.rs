//! Run manifests: what was run, on which inputs, producing which outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use smoothrank::trainer::TrainConfig;

use crate::{CliError, CliResult, SweepArgs, TrainArgs};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "snake_case")]
pub enum Recorded {
    Train(TrainArgs),
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub run: Recorded,
    /// Resolved training configuration (the base config for sweeps).
    pub config: TrainConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digest(role: &str, path: &Path) -> CliResult<FileDigest> {
    Ok(FileDigest {
        role: role.to_owned(),
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}

/// Absolute form of an input path, so manifests survive a change of
/// working directory.
pub fn absolute(path: &Path) -> CliResult<PathBuf> {
    fs::canonicalize(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl RunManifest {
    pub fn new(run: Recorded, config: TrainConfig, inputs: Vec<FileDigest>, outputs: Vec<FileDigest>) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
            run,
            config,
            inputs,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Data(e.to_string()))?;
        fs::write(&path, json + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    /// Inputs whose current content no longer matches the recorded digest.
    pub fn changed_inputs(&self) -> CliResult<Vec<PathBuf>> {
        let mut changed = Vec::new();
        for input in &self.inputs {
            if sha256_file(&input.path)? != input.sha256 {
                changed.push(input.path.clone());
            }
        }
        Ok(changed)
    }
}
