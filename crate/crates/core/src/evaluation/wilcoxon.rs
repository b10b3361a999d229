use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective sample size that uses the exact null distribution.
pub const EXACT_LIMIT: usize = 25;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub n_effective: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    pub exact: bool,
}

/// Average ranks of `values` (1-based), ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Nonzero differences `a - b` with the ranks of their magnitudes.
pub fn signed_ranks(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let ranks = average_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    Ok((d, ranks))
}

/// Two-sided exact p-value for statistic `w` given the (possibly tied) ranks:
/// `min(1, 2 P(T <= w))` where `T` sums the ranks of a uniformly random sign
/// assignment.
pub fn exact_p_value(ranks: &[f64], w: f64) -> f64 {
    // Tied ranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let limit = (2.0 * w).round() as usize;
    let below: f64 = counts.iter().take(limit.min(max) + 1).sum();
    let total = 2f64.powi(ranks.len() as i32);
    (2.0 * below / total).min(1.0)
}

/// Two-sided normal approximation with tie and continuity corrections.
pub fn normal_p_value(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - std.cdf(z))).min(1.0)
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (d, ranks) = signed_ranks(a, b)?;
    if d.len() < MIN_PAIRS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIRS,
            got: d.len(),
        });
    }
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = d.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let statistic = w_plus.min(w_minus);
    let exact = d.len() <= EXACT_LIMIT;
    let p_value = if exact {
        exact_p_value(&ranks, statistic)
    } else {
        normal_p_value(&ranks, statistic)
    };
    Ok(WilcoxonResult {
        statistic,
        w_plus,
        w_minus,
        n_effective: d.len(),
        p_value,
        alpha,
        significant: p_value < alpha,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn rank_arithmetic() {
        let d = [1.0, -2.0, 3.0, -4.0, 5.0];
        let r = wilcoxon_signed_rank(&d, &[0.0; 5], 0.05).unwrap();
        assert_eq!((r.w_plus, r.w_minus, r.statistic), (9.0, 6.0, 6.0));
        assert!(r.exact);
    }

    #[test]
    fn all_positive_six() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = wilcoxon_signed_rank(&a, &[0.0; 6], 0.05).unwrap();
        assert_abs_diff_eq!(r.p_value, 0.03125, epsilon = 1e-15);
        assert!(r.significant);
    }

    #[test]
    fn identical_samples_are_insufficient() {
        let a = [0.5; 8];
        assert!(matches!(
            wilcoxon_signed_rank(&a, &a, 0.05),
            Err(Error::InsufficientData { needed: 5, got: 0 })
        ));
    }

    #[test]
    fn tied_ranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn large_samples_use_normal_path() {
        let a: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let r = wilcoxon_signed_rank(&a, &[0.0; 30], 0.05).unwrap();
        assert!(!r.exact);
        assert!(r.p_value < 1e-5);
    }
}
