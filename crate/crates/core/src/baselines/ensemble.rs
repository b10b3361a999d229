use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::smote::smote_oversample;
use super::tree::{HoeffdingConfig, HoeffdingTree};
use crate::error::{Error, Result};
use crate::streams::{substream_rng, TabularChunk};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub pool_size: usize,
    pub smote_k: usize,
    /// Slope of the error-discount sigmoid.
    pub sigmoid_a: f64,
    /// Offset of the error-discount sigmoid, in chunks.
    pub sigmoid_b: f64,
    pub error_floor: f64,
    pub max_weight: f64,
    pub tree: HoeffdingConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            pool_size: 10,
            smote_k: 5,
            sigmoid_a: 0.5,
            sigmoid_b: 10.0,
            error_floor: 1e-3,
            max_weight: 10.0,
            tree: HoeffdingConfig::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.smote_k == 0 {
            return Err(Error::InvalidConfig("pool_size and smote_k must be positive".into()));
        }
        if !(self.error_floor > 0.0 && self.error_floor < 0.5) {
            return Err(Error::InvalidConfig("error_floor must lie in (0, 0.5)".into()));
        }
        if !(self.max_weight > 0.0) || !self.sigmoid_a.is_finite() || !self.sigmoid_b.is_finite() {
            return Err(Error::InvalidConfig("invalid ensemble weighting parameters".into()));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub tree: HoeffdingTree,
    pub created_at: usize,
    /// Clipped balanced error on every chunk since creation, oldest first.
    pub errors: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateReport {
    /// The chunk held one class; the new member saw the raw chunk.
    pub single_class: bool,
    /// SMOTE fell back to duplicating a lone minority instance.
    pub smote_duplicated: bool,
    /// Every weight was zero and equal weights were substituted.
    pub uniform_fallback: bool,
    /// Creation index of the evicted member, if any.
    pub evicted: Option<usize>,
    /// Weight the evicted member held when it was dropped.
    pub evicted_weight: Option<f64>,
}

/// Chunk-based ensemble: one tree per SMOTE-balanced chunk, weighted by
/// sigmoid-discounted historical error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkEnsemble {
    config: EnsembleConfig,
    seed: u64,
    members: Vec<Member>,
}

/// Balanced error rate; with one class present, the error on that class.
fn balanced_error(y: &[u8], p: &[u8]) -> f64 {
    let mut hit = [0usize; 2];
    let mut n = [0usize; 2];
    for (t, q) in y.iter().zip(p) {
        n[*t as usize] += 1;
        hit[*t as usize] += usize::from(t == q);
    }
    let rates: Vec<f64> = (0..2)
        .filter(|c| n[*c] > 0)
        .map(|c| hit[c] as f64 / n[c] as f64)
        .collect();
    1.0 - rates.iter().sum::<f64>() / rates.len() as f64
}

/// Weighted majority vote; class 0 on ties.
pub fn weighted_vote(predictions: &[Vec<u8>], weights: &[f64]) -> Result<Vec<u8>> {
    if predictions.is_empty() || predictions.len() != weights.len() {
        return Err(Error::InvalidInput("need one weight per voter and at least one voter".into()));
    }
    let n = predictions[0].len();
    if predictions.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidInput("voters disagree on instance count".into()));
    }
    Ok((0..n)
        .map(|i| {
            let mut score = [0.0; 2];
            for (p, w) in predictions.iter().zip(weights) {
                score[p[i] as usize] += w;
            }
            u8::from(score[1] > score[0])
        })
        .collect())
}

impl ChunkEnsemble {
    pub fn new(config: EnsembleConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            seed,
            members: Vec::new(),
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    fn balanced_training_set(
        &self,
        chunk: &TabularChunk,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Result<(Array2<f64>, Vec<u8>, UpdateReport)> {
        let mut report = UpdateReport::default();
        let n1 = chunk.minority_count();
        let n0 = chunk.len() - n1;
        if n0 == 0 || n1 == 0 {
            report.single_class = true;
            return Ok((chunk.features.clone(), chunk.labels.clone(), report));
        }
        let minority_class = u8::from(n1 < n0);
        let rows: Vec<usize> = (0..chunk.len()).filter(|&i| chunk.labels[i] == minority_class).collect();
        let minority = chunk.features.select(Axis(0), &rows);
        let smote = smote_oversample(minority.view(), self.config.smote_k, n0.abs_diff(n1), rng)?;
        report.smote_duplicated = smote.duplicated;
        let features = concatenate(Axis(0), &[chunk.features.view(), smote.samples.view()])
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut labels = chunk.labels.clone();
        labels.extend(std::iter::repeat_n(minority_class, smote.samples.nrows()));

        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.shuffle(rng);
        let features = features.select(Axis(0), &order);
        let labels = order.iter().map(|&i| labels[i]).collect();
        Ok((features, labels, report))
    }

    fn discounted_error(&self, m: &Member) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (age, e) in m.errors.iter().enumerate() {
            let s = 1.0 / (1.0 + (-self.config.sigmoid_a * (age as f64 - self.config.sigmoid_b)).exp());
            num += s * e;
            den += s;
        }
        num / den
    }

    pub fn cds_update(&mut self, chunk: &TabularChunk, chunk_index: usize) -> Result<UpdateReport> {
        if chunk.is_empty() {
            return Err(Error::InvalidInput("cannot update on an empty chunk".into()));
        }
        let mut rng = substream_rng(self.seed, chunk_index as u64);
        let (features, labels, mut report) = self.balanced_training_set(chunk, &mut rng)?;
        let mut tree = HoeffdingTree::new(self.config.tree)?;
        tree.learn_batch(features.view(), &labels)?;
        self.members.push(Member {
            tree,
            created_at: chunk_index,
            errors: Vec::new(),
            weight: 0.0,
        });

        let (floor, cap) = (self.config.error_floor, self.config.max_weight);
        for i in 0..self.members.len() {
            let pred = self.members[i].tree.predict(chunk.features.view())?;
            let e = balanced_error(&chunk.labels, &pred).clamp(floor, 0.5);
            self.members[i].errors.push(e);
            let eb = self.discounted_error(&self.members[i]);
            self.members[i].weight = ((1.0 - eb) / eb).ln().clamp(0.0, cap);
        }
        if self.members.iter().all(|m| m.weight <= 0.0) {
            report.uniform_fallback = true;
            self.members.iter_mut().for_each(|m| m.weight = 1.0);
        }
        if self.members.len() > self.config.pool_size {
            let worst = self
                .members
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .expect("pool is nonempty");
            let gone = self.members.remove(worst);
            report.evicted = Some(gone.created_at);
            report.evicted_weight = Some(gone.weight);
        }
        Ok(report)
    }

    pub fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<u8>> {
        if self.members.is_empty() {
            return Err(Error::InvalidState("ensemble has no members".into()));
        }
        let preds = self
            .members
            .iter()
            .map(|m| m.tree.predict(features))
            .collect::<Result<Vec<_>>>()?;
        weighted_vote(&preds, &self.weights())
    }
}
