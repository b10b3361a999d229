use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sstml::evaluation::MethodSpec;
use sstml::streams::{load_csv_stream, CsvStreamSpec, StreamConfig, SyntheticStream, TabularChunk};

use crate::error::{io_err, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn default_sigma() -> f64 {
    2.0
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum StreamSource {
    Synthetic(StreamConfig),
    Csv(CsvStreamSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEntry {
    pub id: String,
    #[serde(flatten)]
    pub source: StreamSource,
}

impl StreamEntry {
    /// Chunks for one replication. Synthetic streams derive their seed from the
    /// entry seed and the replication seed; CSV streams ignore the latter.
    pub fn chunks(&self, replication_seed: u64) -> sstml::Result<Vec<TabularChunk>> {
        match &self.source {
            StreamSource::Synthetic(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = stream_seed(cfg.seed, replication_seed);
                SyntheticStream::new(cfg)?.collect()
            }
            StreamSource::Csv(spec) => load_csv_stream(spec),
        }
    }
}

/// Seed of a synthetic stream under one replication.
pub fn stream_seed(entry_seed: u64, replication_seed: u64) -> u64 {
    entry_seed ^ replication_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    /// Display and file name; defaults to the method kind.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: MethodSpec,
}

impl MethodEntry {
    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.spec.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub streams: Vec<StreamEntry>,
    pub methods: Vec<MethodEntry>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Write measured times into the per-run CSVs. Off by default so that
    /// reruns produce identical files; the manifest always carries totals.
    #[serde(default)]
    pub record_timings: bool,
    /// Encoded images of the first rows of chunk 0 written as PGM files, per
    /// run of an image-based method.
    #[serde(default)]
    pub export_images: usize,
    /// Write the final model of each image-based run as a checkpoint blob.
    #[serde(default)]
    pub save_checkpoints: bool,
}

pub(crate) fn check_id(what: &str, id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.contains("__")
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid_config(format!(
            "{what} {id:?} must be nonempty, use only [A-Za-z0-9._-], and not contain \"__\""
        )))
    }
}

pub(crate) fn check_methods(methods: &[MethodEntry]) -> Result<()> {
    if methods.is_empty() {
        return Err(CliError::invalid_config("at least one method is required"));
    }
    let mut names = HashSet::new();
    for m in methods {
        check_id("method name", m.name())?;
        if !names.insert(m.name()) {
            return Err(CliError::invalid_config(format!("duplicate method name {:?}", m.name())));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_slice(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_slice(bytes).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, returning it with its raw bytes.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        Ok((Self::from_slice(&bytes, path)?, bytes))
    }

    /// Relative paths are taken relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        for s in &mut self.streams {
            if let StreamSource::Csv(spec) = &mut s.source {
                if spec.path.is_relative() {
                    spec.path = base.join(&spec.path);
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::invalid_config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.streams.is_empty() {
            return Err(CliError::invalid_config("at least one stream is required"));
        }
        check_methods(&self.methods)?;
        if self.seeds.is_empty() {
            return Err(CliError::invalid_config("at least one seed is required"));
        }
        let mut seen = HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(CliError::invalid_config(format!("seed {s} is repeated")));
        }
        let mut ids = HashSet::new();
        for s in &self.streams {
            check_id("stream id", &s.id)?;
            if !ids.insert(&s.id) {
                return Err(CliError::invalid_config(format!("duplicate stream id {:?}", s.id)));
            }
            if let StreamSource::Synthetic(cfg) = &s.source {
                cfg.validate()?;
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(CliError::invalid_config("sigma must be finite and >= 0"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::invalid_config("alpha must lie in (0, 1)"));
        }
        if self.threads == Some(0) {
            return Err(CliError::invalid_config("threads must be positive"));
        }
        Ok(())
    }
}
