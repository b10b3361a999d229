use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    pub samples: Array2<f64>,
    /// Set when fewer than two minority rows forced plain duplication.
    pub duplicated: bool,
}

/// `a + delta (b - a)`.
pub fn smote_point(a: &[f64], b: &[f64], delta: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + delta * (y - x)).collect()
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Synthetic minority samples interpolated towards one of each base point's
/// `min(k, m - 1)` nearest minority neighbours.
pub fn smote_oversample<R: Rng + ?Sized>(
    minority: ArrayView2<f64>,
    k: usize,
    n_new: usize,
    rng: &mut R,
) -> Result<SmoteOutput> {
    let (m, d) = minority.dim();
    if k == 0 {
        return Err(Error::InvalidInput("SMOTE needs k >= 1".into()));
    }
    let mut samples = Array2::zeros((n_new, d));
    if n_new == 0 {
        return Ok(SmoteOutput {
            samples,
            duplicated: m < 2,
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput("cannot oversample an empty minority set".into()));
    }
    if m == 1 {
        for mut row in samples.rows_mut() {
            row.assign(&minority.row(0));
        }
        return Ok(SmoteOutput {
            samples,
            duplicated: true,
        });
    }

    let kk = k.min(m - 1);
    let neighbours: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(minority.row(i), minority.row(j)), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(kk).map(|(_, j)| j).collect()
        })
        .collect();

    for mut out in samples.rows_mut() {
        let i = rng.random_range(0..m);
        let j = neighbours[i][rng.random_range(0..kk)];
        let delta: f64 = rng.random();
        let (a, b) = (minority.row(i), minority.row(j));
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + delta * (y - x);
        }
    }
    Ok(SmoteOutput {
        samples,
        duplicated: false,
    })
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn midpoint() {
        assert_eq!(smote_point(&[0.0, 0.0], &[1.0, 1.0], 0.5), vec![0.5, 0.5]);
    }

    #[test]
    fn empty_request() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = array![[0.0, 0.0], [1.0, 1.0]];
        let out = smote_oversample(m.view(), 5, 0, &mut rng).unwrap();
        assert_eq!(out.samples.dim(), (0, 2));
    }

    #[test]
    fn single_row_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = array![[0.3, 0.7]];
        let out = smote_oversample(m.view(), 5, 3, &mut rng).unwrap();
        assert!(out.duplicated);
        assert!(out.samples.rows().into_iter().all(|r| r.to_vec() == vec![0.3, 0.7]));
        assert!(smote_oversample(m.view(), 0, 3, &mut rng).is_err());
    }
}
