use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Provenance of one output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub params: serde_json::Value,
    pub version: String,
    pub elapsed_seconds: f64,
    pub output: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(
        params: serde_json::Value,
        elapsed_seconds: f64,
        output: &Path,
        bytes: &[u8],
    ) -> Self {
        RunManifest {
            command_line: std::env::args().collect(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed_seconds,
            output: output
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn write_beside(&self, output: &Path) -> std::io::Result<()> {
        let mut body = serde_json::to_string_pretty(self).expect("manifest serializes");
        body.push('\n');
        std::fs::write(manifest_path(output), body)
    }
}

/// Whether `output` still matches the digest in its manifest.
pub fn verify_manifest(output: &Path) -> crate::Result<bool> {
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(manifest_path(output))?)?;
    Ok(manifest.sha256 == sha256_hex(&std::fs::read(output)?))
}
