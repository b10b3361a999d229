//! Concept families behind the synthetic streams.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// SEA attribute values are drawn from `[0, SEA_RANGE]`.
pub const SEA_RANGE: f64 = 10.0;

/// Thresholds assigned to successive SEA concepts.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConceptKind {
    /// Labeled Gaussian clusters in the unit hypercube. Also used as the RBF generator.
    GaussianClusters,
    Sea,
    Hyperplane,
}

impl std::str::FromStr for ConceptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-clusters" | "rbf" => Ok(ConceptKind::GaussianClusters),
            "sea" => Ok(ConceptKind::Sea),
            "hyperplane" => Ok(ConceptKind::Hyperplane),
            other => Err(Error::InvalidConfig(format!("unknown concept kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub center: Vec<f64>,
    pub label: u8,
    pub scale: f64,
}

/// Parameters of one generating concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConceptParams {
    GaussianClusters { centroids: Vec<Centroid> },
    /// Label 1 iff `x[0] + x[1] <= threshold`, or the complement when `inverted`.
    Sea { threshold: f64, inverted: bool },
    /// Label 1 iff `weights . x > offset`.
    Hyperplane { weights: Vec<f64>, offset: f64 },
}

/// Knobs for concept generation. Defaults give two clusters per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConceptOptions {
    pub clusters_per_class: usize,
    /// Per-centroid scale is drawn uniformly from this range.
    pub scale_range: (f64, f64),
    /// Minimum Euclidean distance between centers of different classes.
    pub min_separation: f64,
}

impl Default for ConceptOptions {
    fn default() -> Self {
        Self {
            clusters_per_class: 2,
            scale_range: (0.05, 0.15),
            min_separation: 0.0,
        }
    }
}

impl ConceptOptions {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        if self.clusters_per_class == 0 {
            return Err(Error::InvalidConfig("clusters_per_class must be positive".into()));
        }
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        if !(0.0..1.5).contains(&self.min_separation) {
            return Err(Error::InvalidConfig(
                "min_separation must lie in [0, 1.5)".into(),
            ));
        }
        Ok(())
    }
}

pub fn sea_label(x: &[f64], theta: f64) -> Result<u8> {
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "SEA needs at least 2 features, got {}",
            x.len()
        )));
    }
    Ok(u8::from(x[0] + x[1] <= theta))
}

pub fn hyperplane_label(x: &[f64], w: &[f64], w0: f64) -> Result<u8> {
    if x.len() != w.len() {
        return Err(Error::InvalidInput(format!(
            "hyperplane dimension mismatch: x has {}, w has {}",
            x.len(),
            w.len()
        )));
    }
    let s: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(u8::from(s > w0))
}

/// Draws a fresh concept. `ordinal` is the concept's position in its stream and
/// selects the SEA threshold.
pub fn generate_concept<R: Rng + ?Sized>(
    kind: ConceptKind,
    n_features: usize,
    opts: &ConceptOptions,
    ordinal: usize,
    rng: &mut R,
) -> Result<ConceptParams> {
    if n_features < 2 {
        return Err(Error::InvalidConfig(format!(
            "concepts need at least 2 features, got {n_features}"
        )));
    }
    opts.validate()?;
    match kind {
        ConceptKind::GaussianClusters => gaussian_clusters(n_features, opts, rng),
        ConceptKind::Sea => Ok(ConceptParams::Sea {
            threshold: SEA_THRESHOLDS[ordinal % SEA_THRESHOLDS.len()],
            inverted: false,
        }),
        ConceptKind::Hyperplane => {
            let weights = loop {
                let w: Vec<f64> = (0..n_features).map(|_| rng.random::<f64>()).collect();
                if w.iter().any(|v| *v > 1e-9) {
                    break w;
                }
            };
            let offset = 0.5 * weights.iter().sum::<f64>();
            Ok(ConceptParams::Hyperplane { weights, offset })
        }
    }
}

fn gaussian_clusters<R: Rng + ?Sized>(
    n_features: usize,
    opts: &ConceptOptions,
    rng: &mut R,
) -> Result<ConceptParams> {
    const MAX_ATTEMPTS: usize = 10_000;
    let (lo, hi) = opts.scale_range;
    let mut centroids: Vec<Centroid> = Vec::with_capacity(2 * opts.clusters_per_class);
    for label in [0u8, 1] {
        for _ in 0..opts.clusters_per_class {
            let mut attempts = 0;
            let center = loop {
                let c: Vec<f64> = (0..n_features).map(|_| rng.random::<f64>()).collect();
                let separated = centroids
                    .iter()
                    .filter(|o| o.label != label)
                    .all(|o| euclidean(&o.center, &c) >= opts.min_separation);
                if separated {
                    break c;
                }
                attempts += 1;
                if attempts >= MAX_ATTEMPTS {
                    return Err(Error::InvalidConfig(format!(
                        "could not place centroids {} apart in {n_features} dimensions",
                        opts.min_separation
                    )));
                }
            };
            let scale = lo + (hi - lo) * rng.random::<f64>();
            centroids.push(Centroid {
                center,
                label,
                scale,
            });
        }
    }
    Ok(ConceptParams::GaussianClusters { centroids })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl ConceptParams {
    pub fn kind(&self) -> ConceptKind {
        match self {
            ConceptParams::GaussianClusters { .. } => ConceptKind::GaussianClusters,
            ConceptParams::Sea { .. } => ConceptKind::Sea,
            ConceptParams::Hyperplane { .. } => ConceptKind::Hyperplane,
        }
    }

    /// Same feature distribution with the label regions swapped.
    pub fn inverted(&self) -> ConceptParams {
        match self {
            ConceptParams::GaussianClusters { centroids } => ConceptParams::GaussianClusters {
                centroids: centroids
                    .iter()
                    .map(|c| Centroid {
                        label: 1 - c.label,
                        ..c.clone()
                    })
                    .collect(),
            },
            ConceptParams::Sea {
                threshold,
                inverted,
            } => ConceptParams::Sea {
                threshold: *threshold,
                inverted: !inverted,
            },
            ConceptParams::Hyperplane { weights, offset } => ConceptParams::Hyperplane {
                weights: weights.iter().map(|w| -w).collect(),
                offset: -offset,
            },
        }
    }

    /// Parameter interpolation used by incremental drift. `t = 0` returns `self`
    /// exactly and `t = 1` returns `other` exactly. Discrete parts (labels,
    /// inversion flags) switch at `t = 0.5`.
    pub fn interpolate(&self, other: &ConceptParams, t: f64) -> Result<ConceptParams> {
        if t == 0.0 {
            return Ok(self.clone());
        }
        if t == 1.0 {
            return Ok(other.clone());
        }
        let lerp = |a: f64, b: f64| a + t * (b - a);
        match (self, other) {
            (
                ConceptParams::GaussianClusters { centroids: a },
                ConceptParams::GaussianClusters { centroids: b },
            ) if a.len() == b.len() => Ok(ConceptParams::GaussianClusters {
                centroids: a
                    .iter()
                    .zip(b)
                    .map(|(ca, cb)| Centroid {
                        center: ca
                            .center
                            .iter()
                            .zip(&cb.center)
                            .map(|(x, y)| lerp(*x, *y))
                            .collect(),
                        label: if t < 0.5 { ca.label } else { cb.label },
                        scale: lerp(ca.scale, cb.scale),
                    })
                    .collect(),
            }),
            (
                ConceptParams::Sea {
                    threshold: ta,
                    inverted: ia,
                },
                ConceptParams::Sea {
                    threshold: tb,
                    inverted: ib,
                },
            ) => Ok(ConceptParams::Sea {
                threshold: lerp(*ta, *tb),
                inverted: if t < 0.5 { *ia } else { *ib },
            }),
            (
                ConceptParams::Hyperplane {
                    weights: wa,
                    offset: oa,
                },
                ConceptParams::Hyperplane {
                    weights: wb,
                    offset: ob,
                },
            ) if wa.len() == wb.len() => Ok(ConceptParams::Hyperplane {
                weights: wa.iter().zip(wb).map(|(x, y)| lerp(*x, *y)).collect(),
                offset: lerp(*oa, *ob),
            }),
            _ => Err(Error::InvalidInput(
                "cannot interpolate between concepts of different shape".into(),
            )),
        }
    }

    /// Label assigned by the concept to a point. Gaussian clusters label a point
    /// by its nearest centroid in scale-normalized distance.
    pub fn label(&self, x: &[f64]) -> Result<u8> {
        match self {
            ConceptParams::GaussianClusters { centroids } => {
                let mut best = (f64::INFINITY, 0u8);
                for c in centroids {
                    if c.center.len() != x.len() {
                        return Err(Error::InvalidInput("centroid dimension mismatch".into()));
                    }
                    let d = euclidean(&c.center, x) / c.scale;
                    if d < best.0 {
                        best = (d, c.label);
                    }
                }
                Ok(best.1)
            }
            ConceptParams::Sea {
                threshold,
                inverted,
            } => sea_label(x, *threshold).map(|l| if *inverted { 1 - l } else { l }),
            ConceptParams::Hyperplane { weights, offset } => hyperplane_label(x, weights, *offset),
        }
    }

    /// Draws one feature vector whose label under this concept is `label`.
    pub fn sample_with_label<R: Rng + ?Sized>(
        &self,
        label: u8,
        n_features: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        const MAX_ATTEMPTS: usize = 1_000_000;
        match self {
            ConceptParams::GaussianClusters { centroids } => {
                let pool: Vec<&Centroid> = centroids.iter().filter(|c| c.label == label).collect();
                if pool.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "concept has no centroid for class {label}"
                    )));
                }
                let c = pool[rng.random_range(0..pool.len())];
                Ok(c
                    .center
                    .iter()
                    .map(|m| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + c.scale * z
                    })
                    .collect())
            }
            ConceptParams::Sea { .. } | ConceptParams::Hyperplane { .. } => {
                let range = if matches!(self, ConceptParams::Sea { .. }) {
                    SEA_RANGE
                } else {
                    1.0
                };
                for _ in 0..MAX_ATTEMPTS {
                    let x: Vec<f64> = (0..n_features).map(|_| range * rng.random::<f64>()).collect();
                    if self.label(&x)? == label {
                        return Ok(x);
                    }
                }
                Err(Error::InvalidConfig(format!(
                    "class {label} region is too small to sample"
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn sea_examples() {
        assert_eq!(sea_label(&[2.0, 3.0, 7.1], 8.0).unwrap(), 1);
        assert_eq!(sea_label(&[2.0, 3.0, 7.1], 4.0).unwrap(), 0);
        for third in [-100.0, 0.0, 5.0, 1e6] {
            assert_eq!(sea_label(&[2.0, 3.0, third], 8.0).unwrap(), 1);
        }
        assert!(matches!(sea_label(&[1.0], 8.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hyperplane_examples() {
        assert_eq!(hyperplane_label(&[0.3, 0.4], &[1.0, 1.0], 1.0).unwrap(), 0);
        assert_eq!(hyperplane_label(&[0.8, 0.4], &[1.0, 1.0], 1.0).unwrap(), 1);
        assert_eq!(hyperplane_label(&[-0.8, -0.4], &[-1.0, -1.0], -1.0).unwrap(), 1);
        assert!(hyperplane_label(&[0.3], &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn gaussian_concept_has_both_classes_and_is_deterministic() {
        let opts = ConceptOptions::default();
        let a = generate_concept(
            ConceptKind::GaussianClusters,
            4,
            &opts,
            0,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let b = generate_concept(
            ConceptKind::GaussianClusters,
            4,
            &opts,
            0,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        assert_eq!(a, b);
        let ConceptParams::GaussianClusters { centroids } = &a else {
            panic!("wrong kind")
        };
        assert!(centroids.len() >= 2);
        assert!(centroids.iter().any(|c| c.label == 0));
        assert!(centroids.iter().any(|c| c.label == 1));
        assert!(centroids.iter().all(|c| c.center.iter().all(|v| (0.0..1.0).contains(v))));
    }

    #[test]
    fn interpolation_endpoints_are_exact() {
        let opts = ConceptOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in [ConceptKind::GaussianClusters, ConceptKind::Hyperplane, ConceptKind::Sea] {
            let a = generate_concept(kind, 3, &opts, 0, &mut rng).unwrap();
            let b = generate_concept(kind, 3, &opts, 1, &mut rng).unwrap();
            assert_eq!(a.interpolate(&b, 0.0).unwrap(), a);
            assert_eq!(a.interpolate(&b, 1.0).unwrap(), b);
        }
    }

    #[test]
    fn inversion_swaps_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [ConceptKind::GaussianClusters, ConceptKind::Hyperplane, ConceptKind::Sea] {
            let a = generate_concept(kind, 3, &ConceptOptions::default(), 0, &mut rng).unwrap();
            let inv = a.inverted();
            let range = if kind == ConceptKind::Sea { SEA_RANGE } else { 1.0 };
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| range * rng.random::<f64>()).collect();
                assert_eq!(a.label(&x).unwrap(), 1 - inv.label(&x).unwrap());
            }
        }
    }

    #[test]
    fn rejection_sampling_respects_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sea = ConceptParams::Sea {
            threshold: 7.0,
            inverted: false,
        };
        for label in [0, 1] {
            for _ in 0..50 {
                let x = sea.sample_with_label(label, 3, &mut rng).unwrap();
                assert_eq!(sea.label(&x).unwrap(), label);
            }
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(matches!(
            "spiral".parse::<ConceptKind>(),
            Err(Error::InvalidConfig(_))
        ));
    }
}
