//! The run manifest: a JSON record binding a run's inputs (by digest), the
//! exact configuration used, and every artifact written (by digest).
//!
//! The pipeline is deterministic, so a manifest plus the two input files is
//! enough to reproduce the output tree byte for byte — re-running with the
//! same inputs must yield the same digests.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};
use wavecmp::StudyConfig;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: ToolInfo,
    pub inputs: Vec<InputRecord>,
    /// The configuration actually used, after CLI overrides.
    pub config: StudyConfig,
    /// Every written artifact, path relative to the output directory.
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "wavecmp",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    /// Pretty JSON with a trailing newline; key order is fixed by the
    /// struct definitions, so equal runs serialize identically.
    pub fn to_json_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(2 * digest.len());
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}
