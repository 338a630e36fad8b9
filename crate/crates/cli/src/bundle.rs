//! Result bundles: every file a command writes is recorded, with its SHA-256, in
//! `manifest_<command>.json`. A rerun whose config hash matches an intact manifest is
//! skipped.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub kind: String,
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub config: RunConfig,
    pub files: Vec<FileEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Hash of everything that determines a command's output: the command, the config
/// without its output directory, and the code version.
pub fn config_hash(command: &str, cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.output_dir = PathBuf::new();
    let doc = serde_json::json!({ "command": command, "config": c, "code_version": CODE_VERSION });
    sha256_hex(doc.to_string().as_bytes())
}

pub fn manifest_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("manifest_{command}.json"))
}

/// True when the manifest for `command` carries `hash` and every listed file is unchanged.
pub fn up_to_date(dir: &Path, command: &str, hash: &str) -> bool {
    let Ok(text) = std::fs::read_to_string(manifest_path(dir, command)) else {
        return false;
    };
    let Ok(m) = serde_json::from_str::<Manifest>(&text) else {
        return false;
    };
    m.schema_version == SCHEMA_VERSION
        && m.config_hash == hash
        && m.files.iter().all(|f| std::fs::read(dir.join(&f.path)).is_ok_and(|b| sha256_hex(&b) == f.sha256))
}

pub struct Bundle {
    dir: PathBuf,
    command: String,
    config: RunConfig,
    hash: String,
    started: u64,
    files: Vec<FileEntry>,
}

impl Bundle {
    pub fn new(cfg: &RunConfig, command: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.output_dir)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
        Ok(Bundle {
            dir: cfg.output_dir.clone(),
            command: command.to_string(),
            config: cfg.clone(),
            hash: config_hash(command, cfg),
            started: now(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records a file already written under the bundle directory.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = std::fs::read(self.path(name))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.path(name), bytes)?;
        self.record(name)
    }

    /// Pretty JSON; callers put `schema_version` in the document.
    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("json value serialises");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        drop(w);
        self.record(name)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let path = manifest_path(&self.dir, &self.command);
        let m = Manifest {
            schema_version: SCHEMA_VERSION,
            kind: "manifest".into(),
            command: self.command,
            config_hash: self.hash,
            code_version: CODE_VERSION.into(),
            started_unix: self.started,
            finished_unix: now(),
            config: self.config,
            files: self.files,
        };
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serialises");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
