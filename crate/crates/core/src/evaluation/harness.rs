use std::time::{Duration, Instant};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, mean_defined, ChunkMetrics};
use crate::encoder::BinaryImage;
use crate::error::{Error, Result};
use crate::streams::TabularChunk;

/// Time a method spent encoding inputs inside a predict or learn call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCost {
    pub encode: Duration,
}

/// A learner driven chunk by chunk.
pub trait StreamMethod {
    fn name(&self) -> &str;

    /// Labels for every row of `features`. Never sees the chunk's labels.
    fn predict(&mut self, chunk_index: usize, features: ArrayView2<f64>) -> Result<(Vec<u8>, PhaseCost)>;

    fn learn(&mut self, chunk: &TabularChunk) -> Result<PhaseCost>;

    /// Serialized model state, for methods that have one.
    fn checkpoint(&self) -> Option<Vec<u8>> {
        None
    }

    /// Images the method would feed its model for the first `n` rows.
    fn preview_images(&self, _features: ArrayView2<f64>, _n: usize) -> Result<Vec<BinaryImage>> {
        Ok(Vec::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub stream_id: String,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: String,
    pub stream_id: String,
    pub seed: u64,
    pub threads: usize,
    /// One entry per chunk after the first.
    pub series: Vec<ChunkMetrics>,
}

impl RunResult {
    /// Stream-level score: mean of the defined per-chunk BAC values.
    pub fn mean_bac(&self) -> Option<f64> {
        mean_defined(self.series.iter().map(|c| c.metrics.bac))
    }

    pub fn phase_totals(&self) -> [f64; 3] {
        self.series.iter().fold([0.0; 3], |t, c| {
            [t[0] + c.encode_time_s, t[1] + c.train_time_s, t[2] + c.test_time_s]
        })
    }
}

/// Prequential evaluation: chunk 0 trains only; every later chunk is predicted
/// first, scored, then learned.
pub fn run_test_then_train<M: StreamMethod + ?Sized>(
    method: &mut M,
    chunks: &[TabularChunk],
    config: &RunConfig,
) -> Result<RunResult> {
    if chunks.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "test-then-train needs at least 2 chunks, got {}",
            chunks.len()
        )));
    }
    if chunks.windows(2).any(|w| w[1].chunk_index <= w[0].chunk_index) {
        return Err(Error::InvalidInput("chunk indices must be strictly increasing".into()));
    }
    method.learn(&chunks[0])?;
    let mut series = Vec::with_capacity(chunks.len() - 1);
    for chunk in &chunks[1..] {
        let t0 = Instant::now();
        let (pred, test_cost) = method.predict(chunk.chunk_index, chunk.features.view())?;
        let test_total = t0.elapsed();
        if pred.len() != chunk.len() {
            return Err(Error::InvalidState(format!(
                "{} returned {} predictions for {} instances",
                method.name(),
                pred.len(),
                chunk.len()
            )));
        }
        let metrics = compute_metrics(&chunk.labels, &pred)?;
        let t1 = Instant::now();
        let train_cost = method.learn(chunk)?;
        let train_total = t1.elapsed();
        series.push(ChunkMetrics {
            chunk_index: chunk.chunk_index,
            metrics,
            encode_time_s: (test_cost.encode + train_cost.encode).as_secs_f64(),
            train_time_s: train_total.saturating_sub(train_cost.encode).as_secs_f64(),
            test_time_s: test_total.saturating_sub(test_cost.encode).as_secs_f64(),
        });
    }
    Ok(RunResult {
        method: method.name().to_string(),
        stream_id: config.stream_id.clone(),
        seed: config.seed,
        threads: config.threads,
        series,
    })
}
