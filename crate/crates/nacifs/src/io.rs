//! Run artifacts: content digests, output records, and the run manifest.
//!
//! Every command-line run writes its result files plus one `manifest.json`
//! naming the command, the fully resolved configuration, the master seed,
//! the tool version, and a SHA-256 digest of every output file — enough to
//! reproduce the outputs byte for byte and to verify a copy later.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conformal::SystemSpec;
use crate::{Error, Result};

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One output file, referenced by content digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File name relative to the run's output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// What a run was, exactly: command, resolved configuration, seed, version,
/// wall time, and the digest of every file it wrote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved settings, including the validated system config.
    pub config: serde_json::Value,
    /// Master seed all subsystem streams were derived from.
    pub seed: u64,
    pub version: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputDigest>,
}

/// File name the manifest is stored under in the output directory.
pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    /// Serializes into `dir/manifest.json` (creating `dir`) and returns the
    /// written path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("bad manifest: {e}")))
    }
}

/// Writes `name` under `dir` (creating the directory if needed) and returns
/// its digest record.
pub fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputDigest> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(OutputDigest {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

/// Reads and validates a system configuration file.
pub fn load_system(path: &Path) -> Result<Arc<SystemSpec>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    SystemSpec::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_the_reference_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn outputs_are_written_and_digested() {
        let dir = tempfile::tempdir().unwrap();
        let rec = write_output(dir.path(), "table.csv", b"a,b\n1,2\n").unwrap();
        assert_eq!(rec.path, "table.csv");
        assert_eq!(rec.bytes, 8);
        let on_disk = fs::read(dir.path().join("table.csv")).unwrap();
        assert_eq!(sha256_hex(&on_disk), rec.sha256);
    }

    #[test]
    fn manifest_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            command: "measure".into(),
            config: serde_json::json!({"walkers": 100, "assign": 2}),
            seed: 7,
            version: "0.1.0".into(),
            wall_time_secs: 0.25,
            outputs: vec![OutputDigest {
                path: "measure.csv".into(),
                sha256: sha256_hex(b"x"),
                bytes: 1,
            }],
        };
        let path = manifest.write(dir.path()).unwrap();
        let back = RunManifest::load(&path).unwrap();
        assert_eq!(back.command, manifest.command);
        assert_eq!(back.config, manifest.config);
        assert_eq!(back.outputs, manifest.outputs);
    }

    #[test]
    fn missing_system_file_is_a_config_error() {
        let err = load_system(Path::new("/nonexistent/system.json")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
