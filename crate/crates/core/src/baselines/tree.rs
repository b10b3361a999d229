use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::streams::TabularChunk;

pub const HISTOGRAM_BINS: usize = 10;

/// Hellinger distance between the per-class branch distributions of a binary
/// split. Counts are `(class 0, class 1)` per branch.
pub fn hellinger_split_score(left: [f64; 2], right: [f64; 2]) -> Result<f64> {
    if left.iter().chain(&right).any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return Err(Error::InvalidInput("split counts must be finite and nonnegative".into()));
    }
    let t0 = left[0] + right[0];
    let t1 = left[1] + right[1];
    if t0 <= 0.0 || t1 <= 0.0 {
        return Err(Error::UndefinedScore(format!(
            "class {} is absent from both branches",
            if t0 <= 0.0 { 0 } else { 1 }
        )));
    }
    let dl = (left[1] / t1).sqrt() - (left[0] / t0).sqrt();
    let dr = (right[1] / t1).sqrt() - (right[0] / t0).sqrt();
    Ok((dl * dl + dr * dr).sqrt())
}

/// `sqrt(R² ln(1/δ) / 2n)`.
pub fn hoeffding_bound(value_range: f64, delta: f64, n: usize) -> Result<f64> {
    if !(value_range > 0.0 && value_range.is_finite()) || !(delta > 0.0 && delta < 1.0) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "hoeffding bound needs range > 0, delta in (0, 1), n >= 1; got ({value_range}, {delta}, {n})"
        )));
    }
    Ok((value_range * value_range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoeffdingConfig {
    pub grace_period: usize,
    pub delta: f64,
    pub max_depth: usize,
    pub tie_threshold: f64,
}

impl Default for HoeffdingConfig {
    fn default() -> Self {
        Self {
            grace_period: 50,
            delta: 1e-3,
            max_depth: 20,
            tie_threshold: 0.05,
        }
    }
}

impl HoeffdingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grace_period == 0 {
            return Err(Error::InvalidConfig("grace_period must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.tie_threshold >= 0.0) {
            return Err(Error::InvalidConfig("tie_threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Equal-width per-class histogram over the running range of one feature.
/// When the range grows, existing mass is redistributed by bin overlap.
#[derive(Debug, Clone, PartialEq)]
struct Histogram {
    range: Option<(f64, f64)>,
    counts: [[f64; 2]; HISTOGRAM_BINS],
}

impl Histogram {
    fn new() -> Self {
        Self {
            range: None,
            counts: [[0.0; 2]; HISTOGRAM_BINS],
        }
    }

    fn bin_of(lo: f64, hi: f64, x: f64) -> usize {
        if hi <= lo {
            return 0;
        }
        let b = ((x - lo) / (hi - lo) * HISTOGRAM_BINS as f64).floor();
        (b.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
    }

    fn observe(&mut self, x: f64, class: u8) {
        let (lo, hi) = match self.range {
            None => (x, x),
            Some((lo, hi)) if x < lo || x > hi => {
                let (nlo, nhi) = (lo.min(x), hi.max(x));
                self.rebin(lo, hi, nlo, nhi);
                (nlo, nhi)
            }
            Some(r) => r,
        };
        self.range = Some((lo, hi));
        self.counts[Self::bin_of(lo, hi, x)][class as usize] += 1.0;
    }

    fn rebin(&mut self, lo: f64, hi: f64, nlo: f64, nhi: f64) {
        let mut next = [[0.0; 2]; HISTOGRAM_BINS];
        if hi <= lo {
            let b = Self::bin_of(nlo, nhi, lo);
            next[b] = self.counts.iter().fold([0.0; 2], |a, c| [a[0] + c[0], a[1] + c[1]]);
        } else {
            let w = (hi - lo) / HISTOGRAM_BINS as f64;
            let nw = (nhi - nlo) / HISTOGRAM_BINS as f64;
            for (i, c) in self.counts.iter().enumerate() {
                let (a, b) = (lo + i as f64 * w, lo + (i + 1) as f64 * w);
                for (j, slot) in next.iter_mut().enumerate() {
                    let (na, nb) = (nlo + j as f64 * nw, nlo + (j + 1) as f64 * nw);
                    let overlap = (b.min(nb) - a.max(na)).max(0.0) / w;
                    if overlap > 0.0 {
                        slot[0] += c[0] * overlap;
                        slot[1] += c[1] * overlap;
                    }
                }
            }
        }
        self.counts = next;
    }

    /// Interior bin edges with the class counts left and right of each.
    fn candidates(&self) -> Vec<(f64, [f64; 2], [f64; 2])> {
        let Some((lo, hi)) = self.range else {
            return Vec::new();
        };
        if hi <= lo {
            return Vec::new();
        }
        let w = (hi - lo) / HISTOGRAM_BINS as f64;
        let total = self.counts.iter().fold([0.0; 2], |a, c| [a[0] + c[0], a[1] + c[1]]);
        let mut left = [0.0; 2];
        let mut out = Vec::with_capacity(HISTOGRAM_BINS - 1);
        for i in 1..HISTOGRAM_BINS {
            left[0] += self.counts[i - 1][0];
            left[1] += self.counts[i - 1][1];
            let right = [(total[0] - left[0]).max(0.0), (total[1] - left[1]).max(0.0)];
            out.push((lo + i as f64 * w, left, right));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Leaf {
    class_counts: [f64; 2],
    histograms: Vec<Histogram>,
    since_check: usize,
    depth: usize,
}

impl Leaf {
    fn new(n_features: usize, class_counts: [f64; 2], depth: usize) -> Self {
        Self {
            class_counts,
            histograms: vec![Histogram::new(); n_features],
            since_check: 0,
            depth,
        }
    }

    fn majority(&self) -> u8 {
        u8::from(self.class_counts[1] > self.class_counts[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Leaf),
    /// `x[feature] < threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Incremental decision tree with Hellinger split scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingTree {
    config: HoeffdingConfig,
    n_features: Option<usize>,
    nodes: Vec<Node>,
}

impl HoeffdingTree {
    pub fn new(config: HoeffdingConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            n_features: None,
            nodes: Vec::new(),
        })
    }

    pub fn config(&self) -> &HoeffdingConfig {
        &self.config
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                Node::Split { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.n_features {
            Some(d) if d != x.len() => Err(Error::InvalidInput(format!(
                "tree expects {d} features, got {}",
                x.len()
            ))),
            _ => Ok(()),
        }
    }

    fn route(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(_) => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn learn_one(&mut self, x: &[f64], y: u8) -> Result<()> {
        if y > 1 {
            return Err(Error::InvalidInput(format!("label {y} is not binary")));
        }
        self.check_dim(x)?;
        if self.nodes.is_empty() {
            self.n_features = Some(x.len());
            self.nodes.push(Node::Leaf(Leaf::new(x.len(), [0.0; 2], 0)));
        }
        let at = self.route(x);
        let grace = self.config.grace_period;
        let Node::Leaf(leaf) = &mut self.nodes[at] else {
            unreachable!("route ends at a leaf")
        };
        leaf.class_counts[y as usize] += 1.0;
        for (h, v) in leaf.histograms.iter_mut().zip(x) {
            h.observe(*v, y);
        }
        leaf.since_check += 1;
        if leaf.since_check >= grace {
            leaf.since_check = 0;
            self.try_split(at)?;
        }
        Ok(())
    }

    fn try_split(&mut self, at: usize) -> Result<()> {
        let Node::Leaf(leaf) = &self.nodes[at] else {
            return Ok(());
        };
        if leaf.depth >= self.config.max_depth || leaf.class_counts.iter().any(|c| *c <= 0.0) {
            return Ok(());
        }
        // Best candidate per feature, then the overall best and runner-up.
        let mut per_feature: Vec<(f64, usize, f64, [f64; 2], [f64; 2])> = Vec::new();
        for (f, h) in leaf.histograms.iter().enumerate() {
            let mut best: Option<(f64, usize, f64, [f64; 2], [f64; 2])> = None;
            for (thr, l, r) in h.candidates() {
                let s = match hellinger_split_score(l, r) {
                    Ok(s) => s,
                    Err(Error::UndefinedScore(_)) => continue,
                    Err(e) => return Err(e),
                };
                if best.as_ref().is_none_or(|b| s > b.0) {
                    best = Some((s, f, thr, l, r));
                }
            }
            per_feature.extend(best);
        }
        per_feature.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let Some(&(g1, feature, threshold, lc, rc)) = per_feature.first() else {
            return Ok(());
        };
        let g2 = per_feature.get(1).map_or(0.0, |c| c.0);
        let n = leaf.class_counts[0] + leaf.class_counts[1];
        let eps = hoeffding_bound(2f64.sqrt(), self.config.delta, n.round().max(1.0) as usize)?;
        if g1 <= 0.0 || !(g1 - g2 > eps || eps < self.config.tie_threshold) {
            return Ok(());
        }
        let (d, depth) = (leaf.histograms.len(), leaf.depth + 1);
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf(Leaf::new(d, lc, depth)));
        self.nodes.push(Node::Leaf(Leaf::new(d, rc, depth)));
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right: left + 1,
        };
        Ok(())
    }

    pub fn learn_batch(&mut self, features: ArrayView2<f64>, labels: &[u8]) -> Result<()> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        for (row, y) in features.rows().into_iter().zip(labels) {
            let x = row.to_vec();
            self.learn_one(&x, *y)?;
        }
        Ok(())
    }

    pub fn learn_chunk(&mut self, chunk: &TabularChunk) -> Result<()> {
        self.learn_batch(chunk.features.view(), &chunk.labels)
    }

    /// Majority class of the reached leaf; class 0 on ties and before training.
    pub fn predict_one(&self, x: &[f64]) -> Result<u8> {
        if self.nodes.is_empty() {
            return Ok(0);
        }
        self.check_dim(x)?;
        match &self.nodes[self.route(x)] {
            Node::Leaf(l) => Ok(l.majority()),
            Node::Split { .. } => unreachable!("route ends at a leaf"),
        }
    }

    pub fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<u8>> {
        features
            .rows()
            .into_iter()
            .map(|r| self.predict_one(&r.to_vec()))
            .collect()
    }
}
