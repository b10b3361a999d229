//! Synthetic drifting, imbalanced, noisy binary streams and CSV ingestion.

pub mod concept;
pub mod csv;
pub mod schedule;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::concept::{
    generate_concept, hyperplane_label, sea_label, Centroid, ConceptKind, ConceptOptions,
    ConceptParams,
};
pub use self::csv::{load_csv_stream, CsvStreamSpec, LabelColumn};
pub use self::schedule::{build_drift_schedule, ConceptChange, DriftSchedule, DriftType, Transition};
use crate::error::{Error, Result};

/// One window of the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularChunk {
    pub chunk_index: usize,
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
}

impl TabularChunk {
    pub fn new(chunk_index: usize, features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::InvalidInput("chunk has no instances".into()));
        }
        if features.nrows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if labels.iter().any(|l| *l > 1) {
            return Err(Error::InvalidInput("labels must be 0 or 1".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Self {
            chunk_index,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn minority_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamConfig {
    pub n_chunks: usize,
    pub chunk_size: usize,
    pub n_features: usize,
    /// Fraction of class 1 in every chunk, in (0, 0.5].
    pub minority_fraction: f64,
    /// Fraction of labels flipped per chunk, in [0, 0.5).
    pub label_noise: f64,
    pub seed: u64,
    pub concept_kind: ConceptKind,
    pub concept: ConceptOptions,
    pub drift_type: DriftType,
    pub n_drifts: usize,
    pub recurring: bool,
    /// Number of base concepts cycled through when `recurring`.
    pub recurring_concepts: usize,
    pub concept_change: ConceptChange,
    /// Chunks over which a gradual or incremental drift mixes the two
    /// concepts; defaults to a fifth of a segment.
    pub mixing_width: Option<f64>,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            n_chunks: 3000,
            chunk_size: 250,
            n_features: 8,
            minority_fraction: 0.15,
            label_noise: 0.01,
            seed: 0,
            concept_kind: ConceptKind::GaussianClusters,
            concept: ConceptOptions::default(),
            drift_type: DriftType::Sudden,
            n_drifts: 30,
            recurring: false,
            recurring_concepts: 3,
            concept_change: ConceptChange::Fresh,
            mixing_width: None,
        }
    }
}

/// `floor(n * fraction)`, tolerant of representation error in `fraction`.
pub fn exact_count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 1e-9).floor() as usize
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_chunks == 0 || self.chunk_size == 0 {
            return bad("n_chunks and chunk_size must be positive".into());
        }
        if self.n_features < 2 {
            return bad(format!("n_features must be at least 2, got {}", self.n_features));
        }
        if !(self.minority_fraction > 0.0 && self.minority_fraction <= 0.5) {
            return bad(format!(
                "minority_fraction must lie in (0, 0.5], got {}",
                self.minority_fraction
            ));
        }
        if exact_count(self.chunk_size, self.minority_fraction) < 1 {
            return bad(format!(
                "chunk_size * minority_fraction must be at least 1 ({} * {})",
                self.chunk_size, self.minority_fraction
            ));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad(format!("label_noise must lie in [0, 0.5), got {}", self.label_noise));
        }
        if self.n_drifts >= self.n_chunks {
            return bad(format!(
                "n_drifts ({}) must be below n_chunks ({})",
                self.n_drifts, self.n_chunks
            ));
        }
        if self.recurring && self.recurring_concepts < 2 {
            return bad("recurring streams need at least 2 base concepts".into());
        }
        self.concept.validate()
    }
}

/// Seeded generator for one sub-stream of a stream seed. Sub-stream 0 draws the
/// concepts; chunk `k` uses sub-stream `k + 1`.
pub fn substream_rng(seed: u64, substream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream);
    rng
}

/// A chunk together with its labels before noise was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedChunk {
    pub chunk: TabularChunk,
    pub clean_labels: Vec<u8>,
}

pub fn sample_chunk<R: Rng + ?Sized>(
    schedule: &DriftSchedule,
    config: &StreamConfig,
    chunk_index: usize,
    rng: &mut R,
) -> Result<TabularChunk> {
    sample_chunk_detailed(schedule, config, chunk_index, rng).map(|g| g.chunk)
}

pub fn sample_chunk_detailed<R: Rng + ?Sized>(
    schedule: &DriftSchedule,
    config: &StreamConfig,
    chunk_index: usize,
    rng: &mut R,
) -> Result<GeneratedChunk> {
    if chunk_index >= config.n_chunks {
        return Err(Error::OutOfRange {
            index: chunk_index,
            len: config.n_chunks,
        });
    }
    let n = config.chunk_size;
    let d = config.n_features;
    let n_minority = exact_count(n, config.minority_fraction);

    let mut clean_labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_minority)).collect();
    clean_labels.shuffle(rng);

    let transition = schedule.transition(chunk_index);
    let interpolated = match schedule.drift_type {
        DriftType::Incremental => Some(schedule.interpolated_concept(chunk_index)?),
        _ => None,
    };

    let mut features = Array2::<f64>::zeros((n, d));
    for (i, &label) in clean_labels.iter().enumerate() {
        // Always drawn so that sudden and gradual streams consume the generator identically.
        let u: f64 = rng.random();
        let concept = match &interpolated {
            Some(c) => c,
            None if u < transition.progress => &schedule.concepts[transition.to],
            None => &schedule.concepts[transition.from],
        };
        let x = concept.sample_with_label(label, d, rng)?;
        features.row_mut(i).iter_mut().zip(x).for_each(|(dst, v)| *dst = v);
    }

    let mut labels = clean_labels.clone();
    let n_flip = exact_count(n, config.label_noise);
    for i in rand::seq::index::sample(rng, n, n_flip) {
        labels[i] = 1 - labels[i];
    }

    Ok(GeneratedChunk {
        chunk: TabularChunk::new(chunk_index, features, labels)?,
        clean_labels,
    })
}

/// A configured synthetic stream. Any chunk can be generated independently.
#[derive(Debug, Clone)]
pub struct SyntheticStream {
    pub config: StreamConfig,
    pub schedule: DriftSchedule,
}

impl SyntheticStream {
    pub fn new(config: StreamConfig) -> Result<Self> {
        let schedule = build_drift_schedule(&config, &mut substream_rng(config.seed, 0))?;
        Ok(Self { config, schedule })
    }

    pub fn chunk(&self, chunk_index: usize) -> Result<TabularChunk> {
        self.chunk_detailed(chunk_index).map(|g| g.chunk)
    }

    pub fn chunk_detailed(&self, chunk_index: usize) -> Result<GeneratedChunk> {
        let mut rng = substream_rng(self.config.seed, chunk_index as u64 + 1);
        sample_chunk_detailed(&self.schedule, &self.config, chunk_index, &mut rng)
    }

    pub fn chunks(&self) -> impl Iterator<Item = Result<TabularChunk>> + '_ {
        (0..self.config.n_chunks).map(move |k| self.chunk(k))
    }

    pub fn collect(&self) -> Result<Vec<TabularChunk>> {
        self.chunks().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> StreamConfig {
        StreamConfig {
            n_chunks: 40,
            chunk_size: 250,
            n_features: 4,
            minority_fraction: 0.05,
            label_noise: 0.01,
            n_drifts: 4,
            seed,
            ..StreamConfig::default()
        }
    }

    #[test]
    fn exact_minority_and_noise_counts() {
        let stream = SyntheticStream::new(small(1)).unwrap();
        for k in 0..stream.config.n_chunks {
            let g = stream.chunk_detailed(k).unwrap();
            assert_eq!(g.chunk.len(), 250);
            assert_eq!(g.clean_labels.iter().filter(|l| **l == 1).count(), 12);
            let flipped = g
                .clean_labels
                .iter()
                .zip(&g.chunk.labels)
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(flipped, 2);
        }
    }

    #[test]
    fn chunks_are_deterministic() {
        let a = SyntheticStream::new(small(7)).unwrap();
        let b = SyntheticStream::new(small(7)).unwrap();
        assert_eq!(a.chunk(13).unwrap(), b.chunk(13).unwrap());
        assert_ne!(a.chunk(13).unwrap(), a.chunk(14).unwrap());
    }

    #[test]
    fn out_of_range_chunk() {
        let s = SyntheticStream::new(small(0)).unwrap();
        assert!(matches!(s.chunk(40), Err(Error::OutOfRange { index: 40, len: 40 })));
    }

    #[test]
    fn invalid_fractions_rejected() {
        for cfg in [
            StreamConfig { minority_fraction: 0.0, ..small(0) },
            StreamConfig { minority_fraction: 0.6, ..small(0) },
            StreamConfig { minority_fraction: 0.003, ..small(0) },
            StreamConfig { label_noise: 0.5, ..small(0) },
        ] {
            assert!(matches!(SyntheticStream::new(cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn floor_rule_counts() {
        assert_eq!(exact_count(250, 0.05), 12);
        assert_eq!(exact_count(250, 0.01), 2);
        assert_eq!(exact_count(100, 0.29), 29);
        assert_eq!(exact_count(250, 0.15), 37);
    }

    #[test]
    fn tabular_chunk_rejects_mismatch() {
        let f = Array2::<f64>::zeros((3, 2));
        assert!(TabularChunk::new(0, f.clone(), vec![0, 1]).is_err());
        assert!(TabularChunk::new(0, Array2::zeros((0, 2)), vec![]).is_err());
        assert!(TabularChunk::new(0, f, vec![0, 1, 0]).is_ok());
    }

    #[test]
    fn sea_and_hyperplane_streams_generate() {
        for kind in [ConceptKind::Sea, ConceptKind::Hyperplane] {
            let cfg = StreamConfig {
                concept_kind: kind,
                n_features: 3,
                drift_type: DriftType::Incremental,
                recurring: true,
                ..small(3)
            };
            let s = SyntheticStream::new(cfg).unwrap();
            for k in [0, 10, 20, 39] {
                let c = s.chunk(k).unwrap();
                assert_eq!(c.n_features(), 3);
            }
        }
    }
}
