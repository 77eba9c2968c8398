use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub working_dir: PathBuf,
    /// Every option after defaults were applied.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// SHA-256 of every file read, keyed by path.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every file written, keyed by path.
    pub outputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub duration_ms: u64,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest.iter() {
        write!(hex, "{b:02x}").expect("writing to a string");
    }
    Ok(hex)
}

pub fn digests(paths: &[PathBuf]) -> Result<BTreeMap<String, String>, CliError> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
        .collect()
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        score_core::data::write_text(path, &text).map_err(CliError::Core)
    }

    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = score_core::data::read_text(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}:{}: manifest: {e}", path.display(), e.line())))
    }
}
