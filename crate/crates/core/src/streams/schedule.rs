use rand::Rng;
use serde::{Deserialize, Serialize};

use super::concept::{generate_concept, ConceptParams};
use super::StreamConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftType {
    Sudden,
    Gradual,
    Incremental,
}

impl std::str::FromStr for DriftType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sudden" => Ok(DriftType::Sudden),
            "gradual" => Ok(DriftType::Gradual),
            "incremental" => Ok(DriftType::Incremental),
            other => Err(Error::InvalidConfig(format!("unknown drift type `{other}`"))),
        }
    }
}

/// How the concept that follows a drift is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConceptChange {
    /// A freshly drawn concept (or the next one in the cycle when recurring).
    #[default]
    Fresh,
    /// The previous concept with its label regions swapped.
    LabelSwap,
}

/// Mixing weights with a logit magnitude above this snap to exactly 0 or 1,
/// i.e. weights below ~1e-3 are treated as zero.
const SNAP_LOGIT: f64 = 6.906_754_778_648_553; // ln(999)

/// The active pair of concepts at a chunk and how far the stream has moved
/// from `from` to `to` (0 = fully `from`, 1 = fully `to`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule {
    pub n_chunks: usize,
    pub drift_type: DriftType,
    pub n_drifts: usize,
    pub recurring: bool,
    pub concepts: Vec<ConceptParams>,
    /// Concept id for each stable segment; length `n_drifts + 1`.
    pub sequence: Vec<usize>,
    /// Chunk position of each drift.
    pub midpoints: Vec<f64>,
    /// Mixing window in chunks. Both concepts carry weight only within
    /// `width / 2` of a midpoint.
    pub width: f64,
}

pub fn build_drift_schedule<R: Rng + ?Sized>(
    config: &StreamConfig,
    rng: &mut R,
) -> Result<DriftSchedule> {
    config.validate()?;
    let n_drifts = config.n_drifts;
    let segment = config.n_chunks as f64 / n_drifts.max(1) as f64;
    let midpoints: Vec<f64> = (0..n_drifts).map(|j| (j as f64 + 0.5) * segment).collect();
    let width = config.mixing_width.unwrap_or(segment / 5.0);
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "mixing width must be positive, got {width}"
        )));
    }

    let base = |ordinal: usize, rng: &mut R| {
        generate_concept(
            config.concept_kind,
            config.n_features,
            &config.concept,
            ordinal,
            rng,
        )
    };

    let (concepts, sequence) = match config.concept_change {
        ConceptChange::LabelSwap => {
            let a = base(0, rng)?;
            let b = a.inverted();
            let seq = (0..=n_drifts).map(|p| p % 2).collect();
            (vec![a, b], seq)
        }
        ConceptChange::Fresh if config.recurring => {
            let n_base = config.recurring_concepts;
            let concepts = (0..n_base).map(|i| base(i, rng)).collect::<Result<Vec<_>>>()?;
            let seq = (0..=n_drifts).map(|p| p % n_base).collect();
            (concepts, seq)
        }
        ConceptChange::Fresh => {
            let concepts = (0..=n_drifts).map(|i| base(i, rng)).collect::<Result<Vec<_>>>()?;
            let seq = (0..=n_drifts).collect();
            (concepts, seq)
        }
    };

    Ok(DriftSchedule {
        n_chunks: config.n_chunks,
        drift_type: config.drift_type,
        n_drifts,
        recurring: config.recurring,
        concepts,
        sequence,
        midpoints,
        width,
    })
}

fn logistic(z: f64) -> f64 {
    if z > SNAP_LOGIT {
        1.0
    } else if z < -SNAP_LOGIT {
        0.0
    } else {
        1.0 / (1.0 + (-z).exp())
    }
}

impl DriftSchedule {
    pub fn transition(&self, chunk_index: usize) -> Transition {
        if self.n_drifts == 0 {
            return Transition {
                from: self.sequence[0],
                to: self.sequence[0],
                progress: 0.0,
            };
        }
        // The drift whose segment contains this chunk.
        let j = (chunk_index * self.n_drifts / self.n_chunks).min(self.n_drifts - 1);
        let k = chunk_index as f64;
        let mid = self.midpoints[j];
        let progress = match self.drift_type {
            DriftType::Sudden => {
                if k >= mid {
                    1.0
                } else {
                    0.0
                }
            }
            DriftType::Gradual | DriftType::Incremental => {
                logistic(2.0 * SNAP_LOGIT * (k - mid) / self.width)
            }
        };
        Transition {
            from: self.sequence[j],
            to: self.sequence[j + 1],
            progress,
        }
    }

    /// Concept mixture at a chunk, indexed like `concepts`.
    pub fn weights(&self, chunk_index: usize) -> Vec<f64> {
        let t = self.transition(chunk_index);
        let mut w = vec![0.0; self.concepts.len()];
        w[t.from] += 1.0 - t.progress;
        w[t.to] += t.progress;
        w
    }

    /// Concept used for every instance of an incremental-drift chunk.
    pub fn interpolated_concept(&self, chunk_index: usize) -> Result<ConceptParams> {
        let t = self.transition(chunk_index);
        self.concepts[t.from].interpolate(&self.concepts[t.to], t.progress)
    }
}
