//! Run manifests: what was run, on which inputs, and what it produced.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::{json_bytes, read_bytes};
use crate::{Error, Result};

pub const TOOL: &str = "xpand";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File path, or `-` for standard output.
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        FileDigest {
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        Ok(Self::of_bytes(path.display().to_string(), &read_bytes(path)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Working directory; relative paths in `params` resolve against it.
    pub cwd: PathBuf,
    /// Every parameter of the subcommand, defaults included.
    pub params: serde_json::Value,
    pub seeds: Vec<u64>,
    /// Worker threads requested, if any; results do not depend on it.
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    /// Primary output first, then any side files.
    pub outputs: Vec<FileDigest>,
    pub wall_ms: u64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<RunManifest> {
        let m: RunManifest = serde_json::from_slice(&read_bytes(path)?)?;
        if m.tool != TOOL {
            return Err(Error::format(format!("{}: not an {TOOL} manifest", path.display())));
        }
        Ok(m)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(self)
    }

    /// Errors with a mismatch if an input file changed since the run.
    pub fn check_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let path = self.cwd.join(&input.path);
            let now = sha256_hex(&read_bytes(&path)?);
            if now != input.sha256 {
                return Err(Error::Mismatch(format!(
                    "input {} changed since the recorded run",
                    input.path
                )));
            }
        }
        Ok(())
    }

    /// Compares regenerated output digests with the recorded ones, in order.
    pub fn check_outputs(&self, outputs: &[FileDigest]) -> Result<()> {
        if outputs.len() != self.outputs.len() {
            return Err(Error::Mismatch(format!(
                "{} outputs recorded, {} produced",
                self.outputs.len(),
                outputs.len()
            )));
        }
        for (old, new) in self.outputs.iter().zip(outputs) {
            if old.sha256 != new.sha256 {
                return Err(Error::Mismatch(format!(
                    "output {} differs from the recorded run",
                    old.path
                )));
            }
        }
        Ok(())
    }
}
