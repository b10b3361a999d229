use std::collections::HashMap;
use std::time::Instant;

use ndarray::ArrayView2;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::harness::{PhaseCost, StreamMethod};
use crate::baselines::{ChunkEnsemble, EnsembleConfig, HoeffdingConfig, HoeffdingTree};
use crate::encoder::{plan_layout, BinaryImage, ImageChunk, StmlEncoder};
use crate::error::{Error, Result};
use crate::nn::{
    checkpoint, init_network, predict, train_one_epoch, LossReport, ModelState, NetworkConfig, Normalization,
    SgdMomentum, Variant,
};
use crate::streams::{substream_rng, TabularChunk};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SstmlConfig {
    /// Chosen from the feature count when absent.
    pub image_side: Option<usize>,
    pub variant: Variant,
    pub normalization: Normalization,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
}

impl Default for SstmlConfig {
    fn default() -> Self {
        Self {
            image_side: None,
            variant: Variant::Compact,
            normalization: Normalization::Batch,
            learning_rate: 0.001,
            momentum: 0.9,
            batch_size: 8,
        }
    }
}

/// Image side for `n_features`: 8 → 50, 16 → 80, 32 → 110, 64 → 150, and
/// beyond that the smallest multiple of 10 that fits.
pub fn default_image_side(n_features: usize) -> usize {
    let grid = [(8, 50), (16, 80), (32, 110), (64, 150)];
    if let Some((_, s)) = grid.iter().find(|(d, _)| n_features <= *d) {
        return *s;
    }
    (16..)
        .map(|k| k * 10)
        .find(|s| plan_layout(n_features, *s).is_ok())
        .expect("a large enough image always fits")
}

/// Encodes each chunk to images and trains the CNN for one epoch per chunk.
#[derive(Debug, Clone)]
pub struct SstmlMethod {
    encoder: StmlEncoder,
    model: ModelState<f32>,
    opt: SgdMomentum<f32>,
    rng: ChaCha8Rng,
    batch_size: usize,
    cached: Option<ImageChunk>,
    losses: Vec<LossReport>,
}

impl SstmlMethod {
    pub fn new(config: &SstmlConfig, n_features: usize, seed: u64) -> Result<Self> {
        if config.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        let side = config.image_side.unwrap_or_else(|| default_image_side(n_features));
        let mut net = match config.variant {
            Variant::Compact => NetworkConfig::compact(side),
            Variant::Resnet18 => NetworkConfig::resnet18(side),
        };
        net.normalization = config.normalization;
        let model = init_network(&net, seed)?;
        let opt = SgdMomentum::new(model.params(), config.learning_rate, config.momentum)?;
        Ok(Self {
            encoder: StmlEncoder::new(n_features, side)?,
            model,
            opt,
            rng: substream_rng(seed, 1),
            batch_size: config.batch_size,
            cached: None,
            losses: Vec::new(),
        })
    }

    pub fn model(&self) -> &ModelState<f32> {
        &self.model
    }

    pub fn losses(&self) -> &[LossReport] {
        &self.losses
    }

    pub fn encoder(&self) -> &StmlEncoder {
        &self.encoder
    }
}

impl StreamMethod for SstmlMethod {
    fn name(&self) -> &str {
        "sstml"
    }

    fn predict(&mut self, chunk_index: usize, features: ArrayView2<f64>) -> Result<(Vec<u8>, PhaseCost)> {
        let t = Instant::now();
        let unlabeled = TabularChunk::new(chunk_index, features.to_owned(), vec![0; features.nrows()])?;
        let images = self.encoder.encode_chunk(&unlabeled)?;
        let encode = t.elapsed();
        let out = predict(&self.model, &images)?;
        self.cached = Some(images);
        Ok((out.labels, PhaseCost { encode }))
    }

    fn learn(&mut self, chunk: &TabularChunk) -> Result<PhaseCost> {
        let t = Instant::now();
        let images = match self.cached.take() {
            Some(mut c) if c.chunk_index == chunk.chunk_index && c.len() == chunk.len() => {
                c.labels.clone_from(&chunk.labels);
                c
            }
            _ => self.encoder.encode_chunk(chunk)?,
        };
        let encode = t.elapsed();
        let report = train_one_epoch(&mut self.model, &mut self.opt, &images, self.batch_size, &mut self.rng)?;
        self.losses.push(report);
        Ok(PhaseCost { encode })
    }

    fn checkpoint(&self) -> Option<Vec<u8>> {
        Some(checkpoint::to_bytes(&self.model))
    }

    fn preview_images(&self, features: ArrayView2<f64>, n: usize) -> Result<Vec<BinaryImage>> {
        features
            .rows()
            .into_iter()
            .take(n)
            .map(|row| self.encoder.encode_instance(&row.to_vec()))
            .collect()
    }
}

/// One Hoeffding tree updated on every instance.
#[derive(Debug, Clone)]
pub struct HoeffdingMethod {
    tree: HoeffdingTree,
}

impl HoeffdingMethod {
    pub fn new(config: HoeffdingConfig) -> Result<Self> {
        Ok(Self {
            tree: HoeffdingTree::new(config)?,
        })
    }

    pub fn tree(&self) -> &HoeffdingTree {
        &self.tree
    }
}

impl StreamMethod for HoeffdingMethod {
    fn name(&self) -> &str {
        "hoeffding"
    }

    fn predict(&mut self, _chunk_index: usize, features: ArrayView2<f64>) -> Result<(Vec<u8>, PhaseCost)> {
        Ok((self.tree.predict(features)?, PhaseCost::default()))
    }

    fn learn(&mut self, chunk: &TabularChunk) -> Result<PhaseCost> {
        self.tree.learn_chunk(chunk)?;
        Ok(PhaseCost::default())
    }
}

#[derive(Debug, Clone)]
pub struct CdsMethod {
    ensemble: ChunkEnsemble,
}

impl CdsMethod {
    pub fn new(config: EnsembleConfig, seed: u64) -> Result<Self> {
        Ok(Self {
            ensemble: ChunkEnsemble::new(config, seed)?,
        })
    }

    pub fn ensemble(&self) -> &ChunkEnsemble {
        &self.ensemble
    }
}

impl StreamMethod for CdsMethod {
    fn name(&self) -> &str {
        "cds"
    }

    fn predict(&mut self, _chunk_index: usize, features: ArrayView2<f64>) -> Result<(Vec<u8>, PhaseCost)> {
        Ok((self.ensemble.predict(features)?, PhaseCost::default()))
    }

    fn learn(&mut self, chunk: &TabularChunk) -> Result<PhaseCost> {
        self.ensemble.cds_update(chunk, chunk.chunk_index)?;
        Ok(PhaseCost::default())
    }
}

/// Answers with the true labels it was handed up front. A ceiling reference.
#[derive(Debug, Clone, Default)]
pub struct OracleMethod {
    labels: HashMap<usize, Vec<u8>>,
}

impl OracleMethod {
    pub fn new(chunks: &[TabularChunk]) -> Self {
        Self {
            labels: chunks.iter().map(|c| (c.chunk_index, c.labels.clone())).collect(),
        }
    }
}

impl StreamMethod for OracleMethod {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict(&mut self, chunk_index: usize, features: ArrayView2<f64>) -> Result<(Vec<u8>, PhaseCost)> {
        match self.labels.get(&chunk_index) {
            Some(l) if l.len() == features.nrows() => Ok((l.clone(), PhaseCost::default())),
            _ => Err(Error::InvalidState(format!("oracle has no labels for chunk {chunk_index}"))),
        }
    }

    fn learn(&mut self, _chunk: &TabularChunk) -> Result<PhaseCost> {
        Ok(PhaseCost::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MethodSpec {
    Sstml(SstmlConfig),
    Hoeffding(HoeffdingConfig),
    Cds(EnsembleConfig),
    Oracle,
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Sstml(_) => "sstml",
            MethodSpec::Hoeffding(_) => "hoeffding",
            MethodSpec::Cds(_) => "cds",
            MethodSpec::Oracle => "oracle",
        }
    }

    /// Builds a fresh method for one run. The oracle reads its answers from
    /// `chunks`; other methods ignore them.
    pub fn build(
        &self,
        n_features: usize,
        seed: u64,
        chunks: &[TabularChunk],
    ) -> Result<Box<dyn StreamMethod + Send>> {
        Ok(match self {
            MethodSpec::Sstml(c) => Box::new(SstmlMethod::new(c, n_features, seed)?),
            MethodSpec::Hoeffding(c) => Box::new(HoeffdingMethod::new(*c)?),
            MethodSpec::Cds(c) => Box::new(CdsMethod::new(*c, seed)?),
            MethodSpec::Oracle => Box::new(OracleMethod::new(chunks)),
        })
    }
}
