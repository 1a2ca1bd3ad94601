//! Run records: the machine-readable result of one command.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::group::ball::BALL_FORMAT_VERSION;

/// Bumped whenever a payload layout changes.
pub const RECORD_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Every checked inequality held.
    Pass,
    /// The command ran to completion; nothing was checked or some checks were skipped.
    Complete,
    /// A checked inequality failed.
    Violation,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass | RunStatus::Complete => 0,
            RunStatus::Violation => 2,
        }
    }
}

/// Timestamps are the only fields that differ between reruns of one config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// SHA-256 of the effective config, overrides applied.
    pub config_hash: String,
    /// Crate version, format versions and the payload digest.
    pub content_version: String,
    pub started_at_ms: u128,
    pub finished_at_ms: u128,
    pub status: RunStatus,
    pub payload: Value,
    pub warnings: Vec<String>,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunRecord {
    pub(crate) fn new(
        command: &str,
        config_hash: String,
        started_at_ms: u128,
        status: RunStatus,
        payload: Value,
        warnings: Vec<String>,
    ) -> Self {
        let digest = sha256_hex(payload.to_string().as_bytes());
        Self {
            command: command.to_string(),
            config_hash,
            content_version: format!(
                "{}+r{}b{}.{}",
                env!("CARGO_PKG_VERSION"),
                RECORD_FORMAT_VERSION,
                BALL_FORMAT_VERSION,
                &digest[..12]
            ),
            started_at_ms,
            finished_at_ms: now_ms(),
            status,
            payload,
            warnings,
        }
    }
}

/// A record plus the CSV series it refers to, as `(file name, contents)`.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub record: RunRecord,
    pub csv: Vec<(String, String)>,
}

impl CommandOutput {
    /// Writes `<command>.json` and, when `csv` is set, the series into `dir`.
    pub fn write(&self, dir: &Path, csv: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.json", self.record.command));
        std::fs::write(&path, serde_json::to_string_pretty(&self.record)?)?;
        written.push(path);
        if csv {
            for (name, body) in &self.csv {
                let path = dir.join(name);
                std::fs::write(&path, body)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}
