use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use fracheat::{write_field, Field};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Git-style content hash: SHA-256 of `"blob <len>\0"` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// The field in the on-disk format read by `*_file` config keys.
pub fn field_bytes(f: &Field) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_field(&mut buf, f)?;
    Ok(buf)
}

/// Provenance of one input field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub name: String,
    /// `file <path>` or `recipe <recipe>`.
    pub source: String,
    pub bytes: usize,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(name: &str, source: String, bytes: &[u8]) -> Self {
        InputDigest {
            name: name.to_string(),
            source,
            bytes: bytes.len(),
            sha256: content_hash(bytes),
        }
    }

    pub fn of_field(name: &str, source: String, f: &Field) -> Result<Self, CliError> {
        Ok(Self::new(name, source, &field_bytes(f)?))
    }
}

/// One JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub config_sha256: String,
    pub inputs: &'a [InputDigest],
    pub result: &'a Value,
    /// Left out in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl<'a> Report<'a> {
    pub fn new(
        command: &'a str,
        config: &'a ExperimentConfig,
        inputs: &'a [InputDigest],
        result: &'a Value,
    ) -> Self {
        Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            config_sha256: content_hash(config.serialize().as_bytes()),
            inputs,
            result,
            elapsed_seconds: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_hash_matches_git_blob_framing() {
        // printf 'blob 5\0hello' | sha256sum
        assert_eq!(
            content_hash(b"hello"),
            "8aec4e4876f854f688d0ebfc8f37598f38e5fd6903cccc850ca36591175aeb60"
        );
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
