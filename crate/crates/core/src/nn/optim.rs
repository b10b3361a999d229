use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Plain (non-Nesterov) momentum SGD: `v = m v + g; w = w - lr v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdMomentum<T> {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Vec<Tensor<T>>,
    steps: usize,
}

impl<T: Real> SgdMomentum<T> {
    pub fn new(params: &[Tensor<T>], learning_rate: f64, momentum: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate must be positive, got {learning_rate}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::InvalidConfig(format!("momentum must lie in [0, 1), got {momentum}")));
        }
        Ok(Self {
            learning_rate,
            momentum,
            velocity: params.iter().map(Tensor::zeros_like).collect(),
            steps: 0,
        })
    }

    pub fn velocity(&self) -> &[Tensor<T>] {
        &self.velocity
    }

    /// Number of updates applied so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self, params: &mut [Tensor<T>], grads: &[Tensor<T>]) -> Result<()> {
        if params.len() != self.velocity.len() || grads.len() != params.len() {
            return Err(Error::Shape {
                expected: vec![self.velocity.len()],
                actual: vec![params.len(), grads.len()],
            });
        }
        for ((w, g), v) in params.iter().zip(grads).zip(&self.velocity) {
            if w.shape() != v.shape() || g.shape() != v.shape() {
                return Err(Error::Shape {
                    expected: v.shape().to_vec(),
                    actual: if w.shape() != v.shape() { w.shape() } else { g.shape() }.to_vec(),
                });
            }
        }
        let lr = T::of(self.learning_rate);
        let m = T::of(self.momentum);
        for ((w, g), v) in params.iter_mut().zip(grads).zip(self.velocity.iter_mut()) {
            for ((wi, gi), vi) in w.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
                *vi = m * *vi + *gi;
                *wi -= lr * *vi;
            }
        }
        self.steps += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn scalar(v: f64) -> Vec<Tensor<f64>> {
        vec![Tensor::full(&[1], v)]
    }

    #[test]
    fn plain_sgd_step() {
        let mut w = scalar(1.0);
        let mut opt = SgdMomentum::new(&w, 0.1, 0.0).unwrap();
        opt.step(&mut w, &scalar(0.5)).unwrap();
        assert_abs_diff_eq!(w[0].data()[0], 0.95, epsilon = 1e-15);
    }

    #[test]
    fn momentum_recurrence() {
        let mut w = scalar(1.0);
        let mut opt = SgdMomentum::new(&w, 0.1, 0.9).unwrap();
        opt.step(&mut w, &scalar(0.5)).unwrap();
        assert_abs_diff_eq!(opt.velocity()[0].data()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0].data()[0], 0.95, epsilon = 1e-15);
        opt.step(&mut w, &scalar(0.5)).unwrap();
        assert_abs_diff_eq!(opt.velocity()[0].data()[0], 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0].data()[0], 0.855, epsilon = 1e-15);
        assert_eq!(opt.steps(), 2);
    }

    #[test]
    fn zero_gradient_fixed_point() {
        let mut w = vec![Tensor::full(&[3, 2], 0.7)];
        let mut opt = SgdMomentum::new(&w, 0.5, 0.9).unwrap();
        opt.step(&mut w, &[Tensor::zeros(&[3, 2])]).unwrap();
        assert!(w[0].data().iter().all(|v| *v == 0.7));
    }

    #[test]
    fn shape_mismatch() {
        let mut w = vec![Tensor::<f64>::zeros(&[3])];
        let mut opt = SgdMomentum::new(&w, 0.5, 0.9).unwrap();
        assert!(matches!(opt.step(&mut w, &[Tensor::zeros(&[4])]), Err(Error::Shape { .. })));
        assert!(SgdMomentum::new(&w, 0.0, 0.9).is_err());
        assert!(SgdMomentum::new(&w, 0.1, 1.0).is_err());
    }
}
