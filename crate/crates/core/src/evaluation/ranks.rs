use serde::{Deserialize, Serialize};

use super::wilcoxon::{average_ranks, wilcoxon_signed_rank, WilcoxonResult};
use crate::error::{Error, Result};

pub const MIN_UNITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    /// 0-based method indices.
    pub a: usize,
    pub b: usize,
    /// `None` when too few nonzero differences remain for the test.
    pub test: Option<WilcoxonResult>,
    /// 0-based index of the significantly better method, if any.
    pub winner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub n_units: usize,
    pub alpha: f64,
    /// Larger is better.
    pub average_ranks: Vec<f64>,
    /// For each method, the 1-based indices of methods significantly worse than it.
    pub inferior: Vec<Vec<usize>>,
    pub pairwise: Vec<PairwiseComparison>,
}

/// `scores[m][u]` is method `m`'s aggregate score on evaluation unit `u`.
pub fn mean_ranks(methods: &[String], scores: &[Vec<f64>], alpha: f64) -> Result<RankTable> {
    if methods.len() != scores.len() {
        return Err(Error::InvalidInput(format!(
            "{} method names for {} score rows",
            methods.len(),
            scores.len()
        )));
    }
    if methods.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: methods.len(),
        });
    }
    let n_units = scores[0].len();
    if let Some(row) = scores.iter().position(|r| r.len() != n_units) {
        return Err(Error::InvalidInput(format!(
            "method {} has {} scores, expected {n_units}",
            methods[row],
            scores[row].len()
        )));
    }
    if n_units < MIN_UNITS {
        return Err(Error::InsufficientData {
            needed: MIN_UNITS,
            got: n_units,
        });
    }
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }

    let m = methods.len();
    let mut sums = vec![0.0; m];
    for u in 0..n_units {
        let column: Vec<f64> = scores.iter().map(|r| r[u]).collect();
        for (s, r) in sums.iter_mut().zip(average_ranks(&column)) {
            *s += r;
        }
    }
    let average_ranks = sums.into_iter().map(|s| s / n_units as f64).collect();

    let mut inferior = vec![Vec::new(); m];
    let mut pairwise = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let test = match wilcoxon_signed_rank(&scores[a], &scores[b], alpha) {
                Ok(t) => Some(t),
                Err(Error::InsufficientData { .. }) => None,
                Err(e) => return Err(e),
            };
            let winner = test.filter(|t| t.significant).map(|t| if t.w_plus > t.w_minus { a } else { b });
            if let Some(w) = winner {
                let loser = if w == a { b } else { a };
                inferior[w].push(loser + 1);
            }
            pairwise.push(PairwiseComparison { a, b, test, winner });
        }
    }
    for list in &mut inferior {
        list.sort_unstable();
    }
    Ok(RankTable {
        methods: methods.to_vec(),
        n_units,
        alpha,
        average_ranks,
        inferior,
        pairwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn dominant_method() {
        let a = vec![0.9, 0.8, 0.85, 0.7, 0.95, 0.75];
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v - 0.1 - 0.01 * i as f64).collect();
        let t = mean_ranks(&names(2), &[a, b], 0.05).unwrap();
        assert_eq!(t.average_ranks, vec![2.0, 1.0]);
        assert_eq!(t.inferior, vec![vec![2], vec![]]);
        assert!((t.pairwise[0].test.unwrap().p_value - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn all_tied() {
        let row = vec![0.5; 6];
        let t = mean_ranks(&names(3), &[row.clone(), row.clone(), row], 0.05).unwrap();
        assert_eq!(t.average_ranks, vec![2.0; 3]);
        assert!(t.inferior.iter().all(Vec::is_empty));
        assert!(t.pairwise.iter().all(|p| p.test.is_none()));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            mean_ranks(&names(2), &[vec![0.0; 5], vec![0.0; 4]], 0.05),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            mean_ranks(&names(2), &[vec![0.0; 4], vec![0.0; 4]], 0.05),
            Err(Error::InsufficientData { .. })
        ));
        assert!(mean_ranks(&names(3), &[vec![0.0; 5], vec![0.0; 5]], 0.05).is_err());
    }
}
