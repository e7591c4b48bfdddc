//! Output directory layout and stage manifests.
//!
//! Every stage writes its artifacts plus `<stage>.manifest.json` recording
//! the stage config hash, the seed it used and SHA-256 digests of its inputs
//! and outputs. Downstream stages check both before reading.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, RunConfig, Stage};
use crate::error::CliError;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

pub const CORPUS: &str = "corpus.jsonl";
pub const EXTRACTOR: &str = "extractor.json";
pub const POOLS: &str = "pools.jsonl";
pub const TEMPLATES: &str = "templates.json";
pub const VOCABULARY: &str = "vocabulary.json";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const METRICS: &str = "metrics.jsonl";
pub const REPORT: &str = "report.jsonl";
pub const REPORT_TABLE: &str = "report.txt";
pub const TRACES: &str = "traces.jsonl";
pub const BASELINES: &str = "baselines.jsonl";
pub const BASELINES_TABLE: &str = "baselines.txt";
pub const META: &str = "meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub struct OutDir {
    dir: PathBuf,
    force: bool,
}

/// Bytes of an artifact read through [`OutDir::require`], with its digest.
pub struct Input {
    pub bytes: Vec<u8>,
    pub sha256: String,
}

impl Input {
    pub fn text(&self, name: &str) -> Result<&str, CliError> {
        std::str::from_utf8(&self.bytes).map_err(|_| CliError::Data(format!("{name} is not UTF-8")))
    }
}

impl OutDir {
    pub fn create(dir: &Path, force: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            force,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.path(&format!("{}.manifest.json", stage.command()))
    }

    /// Writes an artifact and returns its digest.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<String, CliError> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(sha256_hex(bytes))
    }

    pub fn write_manifest(
        &self,
        stage: Stage,
        config: &RunConfig,
        seed: u64,
        inputs: BTreeMap<String, String>,
        outputs: BTreeMap<String, String>,
    ) -> Result<(), CliError> {
        let m = Manifest {
            format_version: MANIFEST_FORMAT_VERSION,
            stage: stage.command().to_string(),
            config_hash: config.stage_hash(stage),
            seed,
            inputs,
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        let path = self.manifest_path(stage);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn read_manifest(&self, stage: Stage) -> Result<Option<Manifest>, CliError> {
        let path = self.manifest_path(stage);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "{}: manifest format {} is not supported (expected {MANIFEST_FORMAT_VERSION})",
                path.display(),
                m.format_version
            )));
        }
        Ok(Some(m))
    }

    /// Reads an artifact produced by `stage`, checking that the stage ran
    /// under the current configuration and that the file is unchanged.
    pub fn require(&self, config: &RunConfig, stage: Stage, name: &str) -> Result<Input, CliError> {
        let path = self.path(name);
        let cmd = stage.command();
        let manifest = match self.read_manifest(stage)? {
            Some(m) if path.exists() => m,
            _ => {
                return Err(CliError::Data(format!(
                    "{} not found; run `rlie {cmd}` first",
                    path.display()
                )))
            }
        };
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let sha256 = sha256_hex(&bytes);
        let expected = config.stage_hash(stage);
        if manifest.config_hash != expected {
            self.refuse(format!(
                "{name} was built by `rlie {cmd}` under a different configuration \
                 (manifest {}, current {}); rerun `rlie {cmd}` or pass --force",
                short(&manifest.config_hash),
                short(&expected)
            ))?;
        }
        if manifest.outputs.get(name) != Some(&sha256) {
            self.refuse(format!(
                "{name} does not match the digest in its manifest; rerun `rlie {cmd}` or pass --force"
            ))?;
        }
        Ok(Input { bytes, sha256 })
    }

    fn refuse(&self, message: String) -> Result<(), CliError> {
        if self.force {
            log::warn!("{message} (continuing under --force)");
            Ok(())
        } else {
            Err(CliError::Data(message))
        }
    }
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}
