//! Per-stage run records.
//!
//! Every file-producing stage writes `OUT.run.json` next to its output: the
//! stage name, tool version, parameters and SHA-256 digests of its inputs
//! and outputs. A stage whose record matches the current invocation and
//! whose outputs still hash to the recorded digests is skipped.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::write_json;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Digest256 {
    pub role: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub stage: String,
    pub version: String,
    pub params: serde_json::Value,
    pub inputs: Vec<Digest256>,
    pub outputs: Vec<Digest256>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn digests(files: &[(&str, &Path)]) -> Result<Vec<Digest256>> {
    files
        .iter()
        .map(|(role, p)| Ok(Digest256 { role: role.to_string(), sha256: sha256_file(p)? }))
        .collect()
}

pub fn record_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

/// A stage invocation: what it reads and writes, and with which parameters.
pub struct Stage<'a> {
    pub name: &'static str,
    pub params: serde_json::Value,
    pub inputs: Vec<(&'static str, &'a Path)>,
    pub outputs: Vec<(&'static str, PathBuf)>,
    /// Where the run record lives.
    pub record: PathBuf,
}

impl Stage<'_> {
    fn outputs_ref(&self) -> Vec<(&str, &Path)> {
        self.outputs.iter().map(|(r, p)| (*r, p.as_path())).collect()
    }

    /// True if a previous run with the same inputs and parameters left
    /// outputs that are still intact.
    pub fn up_to_date(&self) -> bool {
        let Ok(prev) = crate::io::read_json::<RunRecord>(&self.record) else { return false };
        if prev.stage != self.name || prev.version != env!("CARGO_PKG_VERSION") || prev.params != self.params {
            return false;
        }
        if self.outputs.iter().any(|(_, p)| !p.exists()) {
            return false;
        }
        match (digests(&self.inputs), digests(&self.outputs_ref())) {
            (Ok(i), Ok(o)) => i == prev.inputs && o == prev.outputs,
            _ => false,
        }
    }

    pub fn finish(&self) -> Result<()> {
        let rec = RunRecord {
            stage: self.name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: self.params.clone(),
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs_ref())?,
        };
        write_json(&self.record, &rec)
    }
}
