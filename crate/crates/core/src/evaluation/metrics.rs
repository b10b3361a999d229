use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class 1 is the positive (minority) class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl ConfusionMatrix {
    pub fn from_labels(y_true: &[u8], y_pred: &[u8]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::InvalidInput(format!(
                "{} true labels but {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::InvalidInput("no labels to score".into()));
        }
        let mut m = Self::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (1, 1) => m.tp += 1,
                (1, 0) => m.fn_ += 1,
                (0, 0) => m.tn += 1,
                (0, 1) => m.fp += 1,
                _ => return Err(Error::InvalidInput(format!("labels must be 0 or 1, got ({t}, {p})"))),
            }
        }
        Ok(m)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.tn + self.fp
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Six scores; `None` marks a 0/0 case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub bac: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub gmean: Option<f64>,
}

impl Metrics {
    pub fn from_confusion(m: &ConfusionMatrix) -> Self {
        let recall = ratio(m.tp, m.tp + m.fn_);
        let specificity = ratio(m.tn, m.tn + m.fp);
        let precision = ratio(m.tp, m.tp + m.fp);
        let both = recall.zip(specificity);
        let f1 = precision.zip(recall).and_then(|(p, r)| (p + r > 0.0).then(|| 2.0 * p * r / (p + r)));
        Self {
            bac: both.map(|(r, s)| (r + s) / 2.0),
            recall,
            specificity,
            precision,
            f1,
            gmean: both.map(|(r, s)| (r * s).sqrt()),
        }
    }

    pub const NAMES: [&'static str; 6] = ["bac", "recall", "specificity", "precision", "f1", "gmean"];

    pub fn values(&self) -> [Option<f64>; 6] {
        [self.bac, self.recall, self.specificity, self.precision, self.f1, self.gmean]
    }
}

pub fn compute_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<Metrics> {
    Ok(Metrics::from_confusion(&ConfusionMatrix::from_labels(y_true, y_pred)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkMetrics {
    pub chunk_index: usize,
    pub metrics: Metrics,
    pub encode_time_s: f64,
    pub train_time_s: f64,
    pub test_time_s: f64,
}

impl ChunkMetrics {
    pub fn total_time_s(&self) -> f64 {
        self.encode_time_s + self.train_time_s + self.test_time_s
    }
}

/// Mean of the defined values; `None` when nothing is defined.
pub fn mean_defined<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn labels_for(tp: usize, fn_: usize, tn: usize, fp: usize) -> (Vec<u8>, Vec<u8>) {
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (n, y, q) in [(tp, 1, 1), (fn_, 1, 0), (tn, 0, 0), (fp, 0, 1)] {
            t.extend(std::iter::repeat_n(y, n));
            p.extend(std::iter::repeat_n(q, n));
        }
        (t, p)
    }

    #[test]
    fn worked_example() {
        let (t, p) = labels_for(20, 5, 60, 15);
        let m = compute_metrics(&t, &p).unwrap();
        assert_abs_diff_eq!(m.recall.unwrap(), 0.8);
        assert_abs_diff_eq!(m.specificity.unwrap(), 0.8);
        assert_abs_diff_eq!(m.bac.unwrap(), 0.8);
    }

    #[test]
    fn constant_predictor() {
        let (t, _) = labels_for(10, 0, 30, 0);
        let m = compute_metrics(&t, &vec![0; 40]).unwrap();
        assert_eq!(m.bac, Some(0.5));
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
    }

    #[test]
    fn single_class_chunk_leaves_bac_undefined() {
        let m = compute_metrics(&[0, 0, 0], &[0, 1, 0]).unwrap();
        assert_eq!(m.recall, None);
        assert_eq!(m.bac, None);
        assert_eq!(m.gmean, None);
        assert!(m.specificity.is_some());
    }

    #[test]
    fn errors() {
        assert!(compute_metrics(&[0, 1], &[0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn mean_skips_undefined() {
        assert_eq!(mean_defined([Some(1.0), None, Some(0.5)]), Some(0.75));
        assert_eq!(mean_defined([None, None]), None);
    }
}
