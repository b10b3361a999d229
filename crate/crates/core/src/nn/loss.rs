use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Per-class loss weights for one chunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights {
    pub weights: [f64; 2],
    /// Set when a class does not occur; its weight is then 0.
    pub absent_class: Option<u8>,
}

/// `w_c = N / (2 N_c)` for each class present.
pub fn class_weights(labels: &[u8]) -> Result<ClassWeights> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("class weights need at least one label".into()));
    }
    let n = labels.len() as f64;
    let mut counts = [0usize; 2];
    for &l in labels {
        match l {
            0 | 1 => counts[l as usize] += 1,
            other => return Err(Error::InvalidInput(format!("label {other} is not binary"))),
        }
    }
    let mut weights = [0.0; 2];
    let mut absent_class = None;
    for c in 0..2 {
        if counts[c] == 0 {
            absent_class = Some(c as u8);
        } else {
            weights[c] = n / (2.0 * counts[c] as f64);
        }
    }
    Ok(ClassWeights {
        weights,
        absent_class,
    })
}

/// Class-weighted softmax cross-entropy, normalized by the total weight of the
/// batch. Returns the loss and its gradient with respect to the logits.
pub fn weighted_cross_entropy<T: Real>(
    logits: &Tensor<T>,
    labels: &[u8],
    weights: &[f64; 2],
) -> Result<(f64, Tensor<T>)> {
    let shape = logits.shape();
    if shape.len() != 2 || shape[1] != 2 || shape[0] != labels.len() {
        return Err(Error::Shape {
            expected: vec![labels.len(), 2],
            actual: shape.to_vec(),
        });
    }
    let total: f64 = labels.iter().map(|&y| weights[y as usize]).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateBatch);
    }
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(shape);
    for (i, &y) in labels.iter().enumerate() {
        let z = [logits.data()[2 * i].to_f64().unwrap(), logits.data()[2 * i + 1].to_f64().unwrap()];
        let m = z[0].max(z[1]);
        let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
        let w = weights[y as usize] / total;
        loss += w * (lse - z[y as usize]);
        for c in 0..2 {
            let p = (z[c] - lse).exp();
            let target = if c == y as usize { 1.0 } else { 0.0 };
            grad.data_mut()[2 * i + c] = T::of(w * (p - target));
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn weight_formula() {
        let mut labels = vec![0u8; 225];
        labels.extend([1u8; 25]);
        let w = class_weights(&labels).unwrap();
        assert_abs_diff_eq!(w.weights[1], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weights[0], 0.5556, epsilon = 1e-4);
        assert_eq!(w.absent_class, None);

        let w = class_weights(&[0, 1, 1, 0]).unwrap();
        assert_eq!(w.weights, [1.0, 1.0]);

        let w = class_weights(&[0, 0, 0]).unwrap();
        assert_eq!(w.weights, [0.5, 0.0]);
        assert_eq!(w.absent_class, Some(1));
        assert!(class_weights(&[]).is_err());
    }

    #[test]
    fn uniform_logits_give_ln2() {
        let logits = Tensor::<f64>::zeros(&[1, 2]);
        let (l, _) = weighted_cross_entropy(&logits, &[0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(l, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let logits = Tensor::<f32>::from_vec(&[1, 2], vec![1000.0, 0.0]).unwrap();
        let (l, g) = weighted_cross_entropy(&logits, &[0], &[1.0, 1.0]).unwrap();
        assert!(l < 1e-6 && l >= 0.0);
        assert!(g.is_finite());
    }

    #[test]
    fn zero_total_weight_is_degenerate() {
        let logits = Tensor::<f64>::zeros(&[2, 2]);
        assert!(matches!(
            weighted_cross_entropy(&logits, &[1, 1], &[1.0, 0.0]),
            Err(Error::DegenerateBatch)
        ));
    }
}
