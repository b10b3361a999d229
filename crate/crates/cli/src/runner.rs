use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use sstml::encoder::BinaryImage;
use sstml::evaluation::{run_test_then_train, RunConfig, RunResult};

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError, Result};
use crate::results::{
    build_rank_report, run_file_name, write_rank_report, write_run_csv, ErrorRecord, Manifest,
    RunRecord,
};
use crate::VERSION;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: PathBuf,
    pub ranks: PathBuf,
    pub succeeded: usize,
    pub failed: usize,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fails with an io error unless `dir` exists (or can be created) and accepts writes.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(|e| io_err(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| io_err(&probe, e))
}

pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const IMAGE_DIR: &str = "images";

fn write_artifacts(dir: &Path, csv_name: &str, a: &Artifacts, record: &mut RunRecord) -> Result<()> {
    let stem = csv_name.trim_end_matches(".csv");
    if let Some(blob) = &a.checkpoint {
        let sub = dir.join(CHECKPOINT_DIR);
        std::fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
        let rel = format!("{CHECKPOINT_DIR}/{stem}.bin");
        std::fs::write(dir.join(&rel), blob).map_err(|e| io_err(dir.join(&rel), e))?;
        record.checkpoint = Some(rel);
    }
    if !a.images.is_empty() {
        let sub = dir.join(IMAGE_DIR);
        std::fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
        for (i, img) in a.images.iter().enumerate() {
            let rel = format!("{IMAGE_DIR}/{stem}__row{i}.pgm");
            img.write_pgm(&dir.join(&rel))?;
            record.images.push(rel);
        }
    }
    Ok(())
}

struct Task {
    stream: usize,
    seed: u64,
    method: usize,
}

/// Debug outputs of one run, written next to its CSV.
#[derive(Default)]
struct Artifacts {
    checkpoint: Option<Vec<u8>>,
    images: Vec<BinaryImage>,
}

fn execute(cfg: &ExperimentConfig, task: &Task, threads: usize) -> (RunRecord, Option<(RunResult, Artifacts)>) {
    let stream = &cfg.streams[task.stream];
    let entry = &cfg.methods[task.method];
    let mut record = RunRecord {
        stream: stream.id.clone(),
        method: entry.name().to_string(),
        seed: task.seed,
        file: None,
        ok: false,
        error: None,
        mean_bac: None,
        chunks_evaluated: 0,
        encode_time_s: 0.0,
        train_time_s: 0.0,
        test_time_s: 0.0,
        wall_time_s: 0.0,
        checkpoint: None,
        images: Vec::new(),
    };
    let t0 = Instant::now();
    let outcome = (|| -> sstml::Result<(RunResult, Artifacts)> {
        let chunks = stream.chunks(task.seed)?;
        let d = chunks.first().map_or(0, |c| c.n_features());
        let mut method = entry.spec.build(d, task.seed, &chunks)?;
        let mut result = run_test_then_train(
            method.as_mut(),
            &chunks,
            &RunConfig {
                stream_id: stream.id.clone(),
                seed: task.seed,
                threads,
            },
        )?;
        result.method = entry.name().to_string();
        let artifacts = Artifacts {
            checkpoint: if cfg.save_checkpoints { method.checkpoint() } else { None },
            images: method.preview_images(chunks[0].features.view(), cfg.export_images)?,
        };
        Ok((result, artifacts))
    })();
    record.wall_time_s = t0.elapsed().as_secs_f64();
    match outcome {
        Ok((result, artifacts)) => {
            let [e, tr, te] = result.phase_totals();
            record.ok = true;
            record.mean_bac = result.mean_bac();
            record.chunks_evaluated = result.series.len();
            record.encode_time_s = e;
            record.train_time_s = tr;
            record.test_time_s = te;
            (record, Some((result, artifacts)))
        }
        Err(e) => {
            record.error = Some(ErrorRecord {
                kind: e.kind().to_string(),
                message: e.to_string(),
            });
            (record, None)
        }
    }
}

/// Runs every (stream, seed, method) triple, writing one CSV per successful
/// run, then `manifest.json` and `ranks.json`. Failed runs are recorded in the
/// manifest and do not stop the others.
pub fn run_experiment(cfg: &ExperimentConfig, config_bytes: &[u8], threads: usize) -> Result<RunSummary> {
    cfg.validate()?;
    if threads == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    let dir = cfg.output_dir.clone();
    ensure_writable(&dir)?;

    let mut manifest = Manifest {
        artifact_version: VERSION.to_string(),
        schema_version: cfg.schema_version,
        config_sha256: sha256_hex(config_bytes),
        stream_ids: cfg.streams.iter().map(|s| s.id.clone()).collect(),
        method_names: cfg.methods.iter().map(|m| m.name().to_string()).collect(),
        seeds: cfg.seeds.clone(),
        threads,
        record_timings: cfg.record_timings,
        started_unix_s: unix_now(),
        finished_unix_s: None,
        runs: Vec::new(),
    };
    let manifest_path = manifest.write(&dir)?;

    let tasks: Vec<Task> = (0..cfg.streams.len())
        .flat_map(|s| {
            cfg.seeds.iter().flat_map(move |&seed| {
                (0..cfg.methods.len()).map(move |method| Task {
                    stream: s,
                    seed,
                    method,
                })
            })
        })
        .collect();

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; tasks.len()]);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(task) = tasks.get(i) else { break };
        let (mut record, result) = execute(cfg, task, threads);
        if let Some((result, artifacts)) = result {
            let name = run_file_name(&record.stream, &record.method, record.seed);
            let written = write_run_csv(&dir.join(&name), &result, cfg.record_timings)
                .and_then(|()| write_artifacts(&dir, &name, &artifacts, &mut record));
            match written {
                Ok(()) => record.file = Some(name),
                Err(e) => {
                    record.ok = false;
                    record.error = Some(ErrorRecord {
                        kind: e.kind().to_string(),
                        message: e.to_string(),
                    });
                }
            }
        }
        slots.lock().expect("no worker panicked")[i] = Some(record);
    };
    std::thread::scope(|s| {
        for _ in 1..threads.min(tasks.len()) {
            s.spawn(worker);
        }
        worker();
    });

    manifest.runs = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect();
    manifest.finished_unix_s = Some(unix_now());
    manifest.write(&dir)?;

    let report = build_rank_report(&dir, &manifest, cfg.alpha)?;
    let ranks = write_rank_report(&dir, &report)?;
    let failed = manifest.runs.iter().filter(|r| !r.ok).count();
    Ok(RunSummary {
        output_dir: dir,
        manifest: manifest_path,
        ranks,
        succeeded: manifest.runs.len() - failed,
        failed,
    })
}
