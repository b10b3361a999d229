//! Result files: per-run CSVs, the manifest and the rank report.
//!
//! Per-run CSV columns, in order:
//! `chunk_index, bac, recall, specificity, precision, f1, gmean,
//! encode_time_s, train_time_s, test_time_s`. An empty metric cell marks an
//! undefined (0/0) value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sstml::evaluation::{mean_defined, mean_ranks, PairwiseComparison, RunResult};

use crate::error::{io_err, CliError, Result};

pub const CSV_HEADER: [&str; 10] = [
    "chunk_index",
    "bac",
    "recall",
    "specificity",
    "precision",
    "f1",
    "gmean",
    "encode_time_s",
    "train_time_s",
    "test_time_s",
];

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RANKS_FILE: &str = "ranks.json";

pub fn run_file_name(stream: &str, method: &str, seed: u64) -> String {
    format!("{stream}__{method}__seed{seed}.csv")
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => CliError::Core(sstml::Error::InvalidInput(format!("{}: {other:?}", path.display()))),
    }
}

/// Writes one run. With `record_timings` off the time columns are written as 0.
pub fn write_run_csv(path: &Path, result: &RunResult, record_timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for c in &result.series {
        let mut row = vec![c.chunk_index.to_string()];
        row.extend(c.metrics.values().iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        let times = if record_timings {
            [c.encode_time_s, c.train_time_s, c.test_time_s]
        } else {
            [0.0; 3]
        };
        row.extend(times.iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub chunk_index: usize,
    /// bac, recall, specificity, precision, f1, gmean.
    pub metrics: [Option<f64>; 6],
    /// encode, train, test seconds.
    pub times: [f64; 3],
}

pub fn read_run_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::Core(sstml::Error::InvalidInput(format!(
            "{} does not have the run CSV header",
            path.display()
        ))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let bad = |col: usize, msg: String| {
            CliError::Core(sstml::Error::Parse {
                row: i + 1,
                column: CSV_HEADER[col].to_string(),
                message: format!("{}: {msg}", path.display()),
            })
        };
        let num = |col: usize| -> Result<f64> {
            rec[col].parse::<f64>().map_err(|e| bad(col, e.to_string()))
        };
        let chunk_index = rec[0].parse::<usize>().map_err(|e| bad(0, e.to_string()))?;
        let mut metrics = [None; 6];
        for (k, m) in metrics.iter_mut().enumerate() {
            if !rec[k + 1].is_empty() {
                *m = Some(num(k + 1)?);
            }
        }
        rows.push(CsvRow {
            chunk_index,
            metrics,
            times: [num(7)?, num(8)?, num(9)?],
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub stream: String,
    pub method: String,
    pub seed: u64,
    /// File name inside the results directory; absent for failed runs.
    pub file: Option<String>,
    pub ok: bool,
    pub error: Option<ErrorRecord>,
    pub mean_bac: Option<f64>,
    pub chunks_evaluated: usize,
    pub encode_time_s: f64,
    pub train_time_s: f64,
    pub test_time_s: f64,
    pub wall_time_s: f64,
    /// Checkpoint blob, relative to the results directory.
    #[serde(default)]
    pub checkpoint: Option<String>,
    /// Exported PGM images, relative to the results directory.
    #[serde(default)]
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub schema_version: u32,
    pub config_sha256: String,
    pub stream_ids: Vec<String>,
    pub method_names: Vec<String>,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub record_timings: bool,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub runs: Vec<RunRecord>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let body = serde_json::to_vec_pretty(self).expect("manifest serializes");
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config {
            path,
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankUnit {
    pub stream: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// `ok`, or `insufficient` when too few methods or units were available.
    pub status: String,
    pub reason: Option<String>,
    pub score: String,
    pub alpha: f64,
    pub methods: Vec<String>,
    pub units: Vec<RankUnit>,
    /// `scores[m][u]`: mean BAC of method `m` on unit `u`.
    pub scores: Vec<Vec<f64>>,
    /// Larger is better.
    pub average_ranks: Vec<f64>,
    /// 1-based indices into `methods` of significantly worse methods.
    pub inferior: Vec<Vec<usize>>,
    pub pairwise: Vec<PairwiseComparison>,
}

/// Mean BAC of a stored run, recomputed from its CSV.
pub fn mean_bac_of(path: &Path) -> Result<Option<f64>> {
    Ok(mean_defined(read_run_csv(path)?.iter().map(|r| r.metrics[0])))
}

/// Ranks every method over the (stream, seed) units on which all of them
/// produced a score.
pub fn build_rank_report(dir: &Path, manifest: &Manifest, alpha: f64) -> Result<RankReport> {
    let methods = manifest.method_names.clone();
    let mut units = Vec::new();
    let mut scores = vec![Vec::new(); methods.len()];
    for stream in &manifest.stream_ids {
        for &seed in &manifest.seeds {
            let mut col = Vec::with_capacity(methods.len());
            for m in &methods {
                let rec = manifest
                    .runs
                    .iter()
                    .find(|r| &r.stream == stream && &r.method == m && r.seed == seed && r.ok);
                let score = match rec.and_then(|r| r.file.as_ref()) {
                    Some(f) => mean_bac_of(&dir.join(f))?,
                    None => None,
                };
                col.push(score);
            }
            if col.iter().all(Option::is_some) {
                units.push(RankUnit {
                    stream: stream.clone(),
                    seed,
                });
                for (row, v) in scores.iter_mut().zip(col) {
                    row.push(v.expect("checked above"));
                }
            }
        }
    }
    let mut report = RankReport {
        status: "ok".into(),
        reason: None,
        score: "mean_bac".into(),
        alpha,
        methods: methods.clone(),
        units,
        scores: scores.clone(),
        average_ranks: Vec::new(),
        inferior: Vec::new(),
        pairwise: Vec::new(),
    };
    match mean_ranks(&methods, &scores, alpha) {
        Ok(t) => {
            report.average_ranks = t.average_ranks;
            report.inferior = t.inferior;
            report.pairwise = t.pairwise;
        }
        Err(e @ sstml::Error::InsufficientData { .. }) => {
            report.status = "insufficient".into();
            report.reason = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

pub fn write_rank_report(dir: &Path, report: &RankReport) -> Result<PathBuf> {
    let path = dir.join(RANKS_FILE);
    let mut body = serde_json::to_vec_pretty(report).expect("report serializes");
    body.push(b'\n');
    std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
