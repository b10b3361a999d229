//! Central finite-difference checks of analytic gradients.

use super::loss::{class_weights, weighted_cross_entropy};
use super::network::ModelState;
use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(x: &[f64], step: f64, mut f: F) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `‖a − b‖₂ / max(‖a‖₂, ‖b‖₂)`, and 0 when both vectors vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut analytic.iter().zip(numeric).map(|(a, b)| a - b));
    let scale = norm(&mut analytic.iter().copied()).max(norm(&mut numeric.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub len: usize,
    pub relative_error: f64,
}

/// Class-weighted loss of a training-mode forward pass that leaves the running
/// statistics alone.
pub fn network_loss<T: Real>(model: &ModelState<T>, x: &Tensor<T>, labels: &[u8]) -> Result<f64> {
    let cw = class_weights(labels)?;
    let (logits, _) = model.forward_train_frozen(x)?;
    Ok(weighted_cross_entropy(&logits, labels, &cw.weights)?.0)
}

/// Compares the analytic gradient of `model` (at its own precision) with
/// central differences taken on a double-precision copy, parameter by
/// parameter.
pub fn check_network_gradients<T: Real>(
    model: &ModelState<T>,
    x: &Tensor<T>,
    labels: &[u8],
    step: f64,
) -> Result<Vec<ParamCheck>> {
    if x.shape().first() != Some(&labels.len()) {
        return Err(Error::InvalidInput(format!(
            "batch of {:?} with {} labels",
            x.shape(),
            labels.len()
        )));
    }
    let cw = class_weights(labels)?;
    let (logits, cache) = model.forward_train_frozen(x)?;
    let (_, dlogits) = weighted_cross_entropy(&logits, labels, &cw.weights)?;
    let grads = model.backward(&cache, &dlogits)?;

    let mut reference = model.cast::<f64>();
    let x64 = x.cast::<f64>();
    let mut out = Vec::with_capacity(grads.len());
    for (p, grad) in grads.iter().enumerate() {
        let start: Vec<f64> = reference.params()[p].data().to_vec();
        let mut failure = None;
        let numeric = central_difference(&start, step, |v| {
            reference.params_mut()[p].data_mut().copy_from_slice(v);
            network_loss(&reference, &x64, labels).unwrap_or_else(|e| {
                failure = Some(e);
                f64::NAN
            })
        });
        reference.params_mut()[p].data_mut().copy_from_slice(&start);
        if let Some(e) = failure {
            return Err(e);
        }
        let analytic: Vec<f64> = grad.data().iter().map(|g| g.to_f64().unwrap()).collect();
        out.push(ParamCheck {
            name: model.param_names()[p].clone(),
            len: analytic.len(),
            relative_error: relative_error(&analytic, &numeric),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_of_a_cubic() {
        let g = central_difference(&[2.0, -1.0], 1e-5, |v| v[0].powi(3) + 4.0 * v[1]);
        assert!((g[0] - 12.0).abs() < 1e-8);
        assert!((g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn relative_error_edge_cases() {
        assert_eq!(relative_error(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(relative_error(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((relative_error(&[2.0], &[1.0]) - 0.5).abs() < 1e-15);
    }
}
