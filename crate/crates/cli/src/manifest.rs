use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), verdict: if passed { Verdict::Pass } else { Verdict::Fail }, detail: detail.into() }
    }

    pub fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), verdict: Verdict::Skipped, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    CheckFailed,
    ConfigError,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::ConfigError => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical config text.
    pub config_digest: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub jobs: usize,
    /// File names relative to the run directory.
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub status: Status,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

pub fn digest(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// `<root>/<command>-<first 16 hex digits>`.
pub fn run_dir(root: &Path, command: &str, digest: &str) -> PathBuf {
    root.join(format!("{command}-{}", &digest[..16]))
}
