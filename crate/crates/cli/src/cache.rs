//! Content-hash stamps that make completed stages no-ops on rerun.
//!
//! Each stage writes `<artifact>.stamp` holding a SHA-256 over everything
//! that determines its output: upstream stamps, file contents and the
//! serialized parameters. A stage is fresh when its stamp matches and the
//! artifact still exists.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use auscult_core::Result;

#[derive(Default)]
pub struct StampBuilder {
    hasher: Sha256,
}

impl StampBuilder {
    pub fn new(stage: &str) -> Self {
        let mut b = StampBuilder::default();
        b.bytes(stage.as_bytes());
        b
    }

    /// Length-prefixed so adjacent fields cannot run together.
    pub fn bytes(&mut self, data: &[u8]) -> &mut Self {
        self.hasher.update((data.len() as u64).to_le_bytes());
        self.hasher.update(data);
        self
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<&mut Self> {
        let text = serde_json::to_vec(value)?;
        Ok(self.bytes(&text))
    }

    pub fn file(&mut self, path: &Path) -> Result<&mut Self> {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.bytes(name.as_bytes());
        let data = fs::read(path)?;
        Ok(self.bytes(&data))
    }

    pub fn finish(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn stamp_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".stamp");
    artifact.with_file_name(name)
}

pub fn read_stamp(artifact: &Path) -> Option<String> {
    fs::read_to_string(stamp_path(artifact)).ok().map(|s| s.trim().to_string())
}

pub fn is_fresh(artifact: &Path, key: &str) -> bool {
    artifact.exists() && read_stamp(artifact).as_deref() == Some(key)
}

/// Drop the stamp before rewriting an artifact, so an interrupted stage is
/// never mistaken for a finished one.
pub fn clear_stamp(artifact: &Path) -> Result<()> {
    match fs::remove_file(stamp_path(artifact)) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn write_stamp(artifact: &Path, key: &str) -> Result<()> {
    fs::write(stamp_path(artifact), format!("{key}\n"))?;
    Ok(())
}
