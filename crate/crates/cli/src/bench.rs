use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sstml::evaluation::{run_test_then_train, ChunkMetrics, MethodSpec, RunConfig};
use sstml::streams::{StreamConfig, SyntheticStream};

use crate::config::{check_methods, MethodEntry, SCHEMA_VERSION};
use crate::error::{io_err, CliError, Result};

fn default_features() -> Vec<usize> {
    vec![8, 16, 32, 64]
}

fn default_sides() -> Vec<usize> {
    vec![50, 80, 110, 150]
}

fn default_n_chunks() -> usize {
    110
}

fn default_chunk_size() -> usize {
    250
}

fn default_warmup() -> usize {
    10
}

fn default_output() -> PathBuf {
    PathBuf::from("timing.csv")
}

fn default_stream() -> StreamConfig {
    StreamConfig {
        n_drifts: 0,
        ..StreamConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub schema_version: u32,
    pub methods: Vec<MethodEntry>,
    #[serde(default = "default_features")]
    pub feature_counts: Vec<usize>,
    /// Image side used by SSTML at each feature count, aligned with `feature_counts`.
    #[serde(default = "default_sides")]
    pub image_sides: Vec<usize>,
    #[serde(default = "default_n_chunks")]
    pub n_chunks: usize,
    #[serde(default = "default_chunk_size")]
    pub chunk_size: usize,
    /// Chunks at the start of each run left out of the timing statistics.
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default)]
    pub seed: u64,
    /// Template for the synthetic stream; size and feature count are overridden.
    #[serde(default = "default_stream")]
    pub stream: StreamConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        let mut cfg: Self = serde_json::from_slice(&bytes).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if cfg.output.is_relative() {
            cfg.output = path.parent().unwrap_or(Path::new(".")).join(&cfg.output);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::invalid_config(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        check_methods(&self.methods)?;
        if self.feature_counts.len() != self.image_sides.len() {
            return Err(CliError::invalid_config(format!(
                "{} feature counts but {} image sides",
                self.feature_counts.len(),
                self.image_sides.len()
            )));
        }
        if self.feature_counts.is_empty() {
            return Err(CliError::invalid_config("the benchmark grid is empty"));
        }
        if self.n_chunks < self.warmup.max(1) + 1 {
            return Err(CliError::invalid_config(format!(
                "{} chunks leave nothing to measure after {} warm-up chunks",
                self.n_chunks, self.warmup
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n_features: usize,
    pub image_side: usize,
    pub method: String,
    pub chunks_measured: usize,
    pub mean_chunk_time_s: f64,
    pub std_chunk_time_s: f64,
    pub mean_encode_time_s: f64,
    pub mean_train_time_s: f64,
    pub mean_test_time_s: f64,
}

/// Chunks whose index is below `warmup` are dropped. Chunk 0 is train-only and
/// never appears in a series, so it always counts as warm-up. The standard
/// deviation is the sample one.
pub fn timing_stats(series: &[ChunkMetrics], warmup: usize) -> (usize, [f64; 5]) {
    let kept: Vec<&ChunkMetrics> = series.iter().filter(|c| c.chunk_index >= warmup).collect();
    let n = kept.len();
    if n == 0 {
        return (0, [0.0; 5]);
    }
    let mean = |f: &dyn Fn(&ChunkMetrics) -> f64| kept.iter().map(|c| f(c)).sum::<f64>() / n as f64;
    let total = mean(&|c| c.total_time_s());
    let var = if n > 1 {
        kept.iter().map(|c| (c.total_time_s() - total).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    (
        n,
        [
            total,
            var.sqrt(),
            mean(&|c| c.encode_time_s),
            mean(&|c| c.train_time_s),
            mean(&|c| c.test_time_s),
        ],
    )
}

pub fn run_timing_benchmark(cfg: &BenchConfig) -> Result<Vec<TimingRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (&d, &side) in cfg.feature_counts.iter().zip(&cfg.image_sides) {
        let stream = StreamConfig {
            n_chunks: cfg.n_chunks,
            chunk_size: cfg.chunk_size,
            n_features: d,
            seed: cfg.seed,
            ..cfg.stream.clone()
        };
        let chunks = SyntheticStream::new(stream)?.collect()?;
        for entry in &cfg.methods {
            let spec = match &entry.spec {
                MethodSpec::Sstml(c) => {
                    let mut c = *c;
                    c.image_side = Some(side);
                    MethodSpec::Sstml(c)
                }
                other => other.clone(),
            };
            let mut method = spec.build(d, cfg.seed, &chunks)?;
            let run = RunConfig {
                stream_id: format!("bench-d{d}"),
                seed: cfg.seed,
                threads: 1,
            };
            let result = run_test_then_train(method.as_mut(), &chunks, &run)?;
            let (n, [mean, std, enc, tr, te]) = timing_stats(&result.series, cfg.warmup);
            rows.push(TimingRow {
                n_features: d,
                image_side: side,
                method: entry.name().to_string(),
                chunks_measured: n,
                mean_chunk_time_s: mean,
                std_chunk_time_s: std,
                mean_encode_time_s: enc,
                mean_train_time_s: tr,
                mean_test_time_s: te,
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv(path: &Path, rows: &[TimingRow]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, std::io::Error::other(e)))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
