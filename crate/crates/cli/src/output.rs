//! Atomic output files and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, ResultExt};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub seed_source: Option<&'static str>,
    pub config_sha256: String,
    /// Effective configuration after overrides; rerun with `--config` on it.
    pub config: String,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Collects outputs in one directory, each written via temp file + rename.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).runtime(&format!("create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.dir.join(name);
        let context = format!("write {}", target.display());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).runtime(&context)?;
        tmp.write_all(bytes).runtime(&context)?;
        tmp.as_file().sync_all().runtime(&context)?;
        tmp.persist(&target).runtime(&context)?;
        self.written.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(target)
    }

    pub fn finish(mut self, mut manifest: Manifest) -> Result<(), CliError> {
        manifest.outputs = std::mem::take(&mut self.written);
        let mut text = serde_json::to_string_pretty(&manifest).runtime("manifest")?;
        text.push('\n');
        let name = format!("{}.manifest.json", manifest.subcommand);
        self.write(&name, text.as_bytes())?;
        Ok(())
    }
}
