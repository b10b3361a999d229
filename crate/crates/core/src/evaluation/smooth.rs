use crate::error::{Error, Result};

/// Discrete Gaussian truncated at `ceil(4 sigma)`, normalized to sum 1.
/// Index `r` of the result is offset `r - radius`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(vec![1.0]);
    }
    let radius = (4.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|o| (-(o * o) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / s).collect())
}

/// Smooths a series with gaps. Each output is the kernel-weighted mean of the
/// defined neighbours, with weights renormalized over what is available.
pub fn gaussian_smooth_partial(series: &[Option<f64>], sigma: f64) -> Result<Vec<Option<f64>>> {
    if series.is_empty() {
        return Err(Error::InvalidInput("cannot smooth an empty series".into()));
    }
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as i64;
    let n = series.len() as i64;
    Ok((0..n)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            for (r, w) in kernel.iter().enumerate() {
                let j = i + r as i64 - radius;
                if (0..n).contains(&j) {
                    if let Some(v) = series[j as usize] {
                        num += w * v;
                        den += w;
                    }
                }
            }
            (den > 0.0).then(|| num / den)
        })
        .collect())
}

pub fn gaussian_smooth(series: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if sigma == 0.0 && !series.is_empty() {
        return Ok(series.to_vec());
    }
    let wrapped: Vec<Option<f64>> = series.iter().map(|v| Some(*v)).collect();
    Ok(gaussian_smooth_partial(&wrapped, sigma)?
        .into_iter()
        .map(|v| v.expect("every input is defined"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_constant() {
        let s = vec![0.3, 0.9, 0.1, 0.4];
        assert_eq!(gaussian_smooth(&s, 0.0).unwrap(), s);
        let c = vec![0.7; 50];
        for v in gaussian_smooth(&c, 3.0).unwrap() {
            assert!((v - 0.7).abs() < 1e-12);
        }
        assert!(gaussian_smooth(&[], 1.0).is_err());
        assert!(gaussian_smooth(&[1.0], -1.0).is_err());
    }

    #[test]
    fn gaps_are_skipped() {
        let s = [Some(1.0), None, Some(1.0)];
        let out = gaussian_smooth_partial(&s, 1.0).unwrap();
        assert!(out.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
        assert_eq!(gaussian_smooth_partial(&[None, None], 1.0).unwrap(), vec![None, None]);
    }
}
