//! Forward and backward kernels for each layer type, on NCHW tensors.

use super::tensor::{gemm, MatRef, Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn output_side(&self, side: usize) -> usize {
        (side + 2 * self.pad - self.kernel) / self.stride + 1
    }

    pub fn weight_shape(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.kernel, self.kernel]
    }

    fn patch_len(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }
}

/// Output columns `ox` whose input column `ox * s + kj - p` lies inside the image.
fn valid_cols(out_side: usize, side: usize, s: usize, kj: usize, p: usize) -> (usize, usize) {
    let lo = if kj >= p { 0 } else { (p - kj).div_ceil(s) };
    let hi = if side + p > kj { ((side + p - kj - 1) / s + 1).min(out_side) } else { 0 };
    (lo, hi.max(lo))
}

fn im2col<T: Real>(x: &[T], side: usize, g: &ConvGeom, out_side: usize, cols: &mut [T]) {
    let (k, s, p) = (g.kernel, g.stride, g.pad);
    let hw = out_side * out_side;
    for c in 0..g.in_channels {
        let plane = &x[c * side * side..(c + 1) * side * side];
        for ki in 0..k {
            for kj in 0..k {
                let row = &mut cols[((c * k + ki) * k + kj) * hw..][..hw];
                let (lo, hi) = valid_cols(out_side, side, s, kj, p);
                for oy in 0..out_side {
                    let dst = &mut row[oy * out_side..(oy + 1) * out_side];
                    let iy = (oy * s + ki) as isize - p as isize;
                    if iy < 0 || iy >= side as isize || lo == hi {
                        dst.fill(T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * side..(iy as usize + 1) * side];
                    dst[..lo].fill(T::zero());
                    dst[hi..].fill(T::zero());
                    let first = lo * s + kj - p;
                    if s == 1 {
                        dst[lo..hi].copy_from_slice(&src[first..first + (hi - lo)]);
                    } else {
                        for (d, v) in dst[lo..hi].iter_mut().zip(src[first..].iter().step_by(s)) {
                            *d = *v;
                        }
                    }
                }
            }
        }
    }
}

fn col2im<T: Real>(cols: &[T], side: usize, g: &ConvGeom, out_side: usize, dx: &mut [T]) {
    let (k, s, p) = (g.kernel, g.stride, g.pad);
    let hw = out_side * out_side;
    for c in 0..g.in_channels {
        let plane = &mut dx[c * side * side..(c + 1) * side * side];
        for ki in 0..k {
            for kj in 0..k {
                let row = &cols[((c * k + ki) * k + kj) * hw..][..hw];
                let (lo, hi) = valid_cols(out_side, side, s, kj, p);
                if lo == hi {
                    continue;
                }
                let first = lo * s + kj - p;
                for oy in 0..out_side {
                    let iy = (oy * s + ki) as isize - p as isize;
                    if iy < 0 || iy >= side as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * side..(iy as usize + 1) * side];
                    let src = &row[oy * out_side + lo..oy * out_side + hi];
                    if s == 1 {
                        for (d, v) in dst[first..first + (hi - lo)].iter_mut().zip(src) {
                            *d += *v;
                        }
                    } else {
                        for (d, v) in dst[first..].iter_mut().step_by(s).zip(src) {
                            *d += *v;
                        }
                    }
                }
            }
        }
    }
}

/// Bias-free 2-D convolution. `x` is `[B, C_in, S, S]`, `w` is `[C_out, C_in, k, k]`.
pub fn conv2d_forward<T: Real>(x: &Tensor<T>, w: &Tensor<T>, g: &ConvGeom) -> Tensor<T> {
    let (b, side) = (x.shape()[0], x.shape()[2]);
    let os = g.output_side(side);
    let hw = os * os;
    let mut y = Tensor::zeros(&[b, g.out_channels, os, os]);
    let mut cols = vec![T::zero(); g.patch_len() * hw];
    let in_len = g.in_channels * side * side;
    let out_len = g.out_channels * hw;
    for i in 0..b {
        im2col(&x.data()[i * in_len..(i + 1) * in_len], side, g, os, &mut cols);
        gemm(
            T::one(),
            MatRef::new(w.data(), g.out_channels, g.patch_len()),
            MatRef::new(&cols, g.patch_len(), hw),
            T::zero(),
            &mut y.data_mut()[i * out_len..(i + 1) * out_len],
        );
    }
    y
}

/// Accumulates the weight gradient into `dw` and returns the input gradient
/// when `need_dx`.
pub fn conv2d_backward<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    g: &ConvGeom,
    dy: &Tensor<T>,
    dw: &mut Tensor<T>,
    need_dx: bool,
) -> Option<Tensor<T>> {
    let (b, side) = (x.shape()[0], x.shape()[2]);
    let os = g.output_side(side);
    let hw = os * os;
    let in_len = g.in_channels * side * side;
    let out_len = g.out_channels * hw;
    let mut cols = vec![T::zero(); g.patch_len() * hw];
    let mut dcols = vec![T::zero(); g.patch_len() * hw];
    let mut dx = need_dx.then(|| Tensor::zeros(x.shape()));
    for i in 0..b {
        let dyi = &dy.data()[i * out_len..(i + 1) * out_len];
        im2col(&x.data()[i * in_len..(i + 1) * in_len], side, g, os, &mut cols);
        gemm(
            T::one(),
            MatRef::new(dyi, g.out_channels, hw),
            MatRef::new(&cols, g.patch_len(), hw).t(),
            T::one(),
            dw.data_mut(),
        );
        if let Some(dx) = dx.as_mut() {
            gemm(
                T::one(),
                MatRef::new(w.data(), g.out_channels, g.patch_len()).t(),
                MatRef::new(dyi, g.out_channels, hw),
                T::zero(),
                &mut dcols,
            );
            col2im(&dcols, side, g, os, &mut dx.data_mut()[i * in_len..(i + 1) * in_len]);
        }
    }
    dx
}

#[derive(Debug, Clone)]
pub struct BatchNormCache<T> {
    xhat: Vec<T>,
    inv_std: Vec<T>,
}

fn channel_dims<T: Real>(x: &Tensor<T>) -> (usize, usize, usize) {
    let s = x.shape();
    (s[0], s[1], s[2] * s[3])
}

/// Batch normalization with minibatch statistics. Running statistics are
/// blended in with weight `momentum`; the running variance uses the unbiased
/// estimate.
#[allow(clippy::too_many_arguments)]
pub fn batchnorm_forward_train<T: Real>(
    x: &Tensor<T>,
    gamma: &[T],
    beta: &[T],
    running_mean: &mut [T],
    running_var: &mut [T],
    momentum: T,
    eps: T,
) -> (Tensor<T>, BatchNormCache<T>) {
    let (b, c, hw) = channel_dims(x);
    let m = b * hw;
    let mf = T::of(m as f64);
    let mut y = Tensor::zeros(x.shape());
    let mut xhat = vec![T::zero(); x.len()];
    let mut inv_std = vec![T::zero(); c];
    let xd = x.data();
    for ch in 0..c {
        let idx = |i: usize, j: usize| (i * c + ch) * hw + j;
        let mut mean = T::zero();
        for i in 0..b {
            for j in 0..hw {
                mean += xd[idx(i, j)];
            }
        }
        mean = mean / mf;
        let mut var = T::zero();
        for i in 0..b {
            for j in 0..hw {
                let d = xd[idx(i, j)] - mean;
                var += d * d;
            }
        }
        var = var / mf;
        let istd = T::one() / (var + eps).sqrt();
        inv_std[ch] = istd;
        let yd = y.data_mut();
        for i in 0..b {
            for j in 0..hw {
                let n = (xd[idx(i, j)] - mean) * istd;
                xhat[idx(i, j)] = n;
                yd[idx(i, j)] = gamma[ch] * n + beta[ch];
            }
        }
        let unbiased = if m > 1 { var * mf / T::of((m - 1) as f64) } else { var };
        running_mean[ch] = (T::one() - momentum) * running_mean[ch] + momentum * mean;
        running_var[ch] = (T::one() - momentum) * running_var[ch] + momentum * unbiased;
    }
    (y, BatchNormCache { xhat, inv_std })
}

pub fn batchnorm_forward_eval<T: Real>(
    x: &Tensor<T>,
    gamma: &[T],
    beta: &[T],
    running_mean: &[T],
    running_var: &[T],
    eps: T,
) -> Tensor<T> {
    let (b, c, hw) = channel_dims(x);
    let mut y = Tensor::zeros(x.shape());
    let (xd, yd) = (x.data(), y.data_mut());
    for i in 0..b {
        for ch in 0..c {
            let scale = gamma[ch] / (running_var[ch] + eps).sqrt();
            let shift = beta[ch] - running_mean[ch] * scale;
            let base = (i * c + ch) * hw;
            for j in base..base + hw {
                yd[j] = xd[j] * scale + shift;
            }
        }
    }
    y
}

/// Accumulates into `dgamma`/`dbeta` and returns the input gradient.
pub fn batchnorm_backward<T: Real>(
    dy: &Tensor<T>,
    gamma: &[T],
    cache: &BatchNormCache<T>,
    dgamma: &mut [T],
    dbeta: &mut [T],
) -> Tensor<T> {
    let (b, c, hw) = channel_dims(dy);
    let mf = T::of((b * hw) as f64);
    let mut dx = Tensor::zeros(dy.shape());
    let dyd = dy.data();
    for ch in 0..c {
        let idx = |i: usize, j: usize| (i * c + ch) * hw + j;
        let (mut sum_dy, mut sum_dy_xhat) = (T::zero(), T::zero());
        for i in 0..b {
            for j in 0..hw {
                let k = idx(i, j);
                sum_dy += dyd[k];
                sum_dy_xhat += dyd[k] * cache.xhat[k];
            }
        }
        dgamma[ch] += sum_dy_xhat;
        dbeta[ch] += sum_dy;
        let scale = gamma[ch] * cache.inv_std[ch] / mf;
        let dxd = dx.data_mut();
        for i in 0..b {
            for j in 0..hw {
                let k = idx(i, j);
                dxd[k] = scale * (mf * dyd[k] - sum_dy - cache.xhat[k] * sum_dy_xhat);
            }
        }
    }
    dx
}

pub fn relu_forward<T: Real>(x: &mut Tensor<T>) {
    x.data_mut().iter_mut().for_each(|v| *v = v.max(T::zero()));
}

/// Masks `dy` in place by the ReLU output `y`.
pub fn relu_backward<T: Real>(y: &Tensor<T>, dy: &mut Tensor<T>) {
    dy.data_mut()
        .iter_mut()
        .zip(y.data())
        .for_each(|(d, v)| {
            if *v <= T::zero() {
                *d = T::zero();
            }
        });
}

#[derive(Debug, Clone)]
pub struct MaxPoolCache {
    input_shape: Vec<usize>,
    argmax: Vec<usize>,
}

/// Max pooling with window `k`, stride `s`, padding `p` (padding never wins).
pub fn maxpool_forward<T: Real>(x: &Tensor<T>, k: usize, s: usize, p: usize) -> (Tensor<T>, MaxPoolCache) {
    let sh = x.shape();
    let (b, c, side) = (sh[0], sh[1], sh[2]);
    let os = (side + 2 * p - k) / s + 1;
    let mut y = Tensor::zeros(&[b, c, os, os]);
    let mut argmax = vec![0; b * c * os * os];
    let xd = x.data();
    for plane in 0..b * c {
        let base = plane * side * side;
        for oy in 0..os {
            for ox in 0..os {
                let mut best = (T::neg_infinity(), 0usize);
                for ki in 0..k {
                    let iy = (oy * s + ki) as isize - p as isize;
                    if iy < 0 || iy >= side as isize {
                        continue;
                    }
                    for kj in 0..k {
                        let ix = (ox * s + kj) as isize - p as isize;
                        if ix < 0 || ix >= side as isize {
                            continue;
                        }
                        let at = base + iy as usize * side + ix as usize;
                        if xd[at] > best.0 {
                            best = (xd[at], at);
                        }
                    }
                }
                let o = (plane * os + oy) * os + ox;
                y.data_mut()[o] = best.0;
                argmax[o] = best.1;
            }
        }
    }
    (
        y,
        MaxPoolCache {
            input_shape: sh.to_vec(),
            argmax,
        },
    )
}

pub fn maxpool_backward<T: Real>(dy: &Tensor<T>, cache: &MaxPoolCache) -> Tensor<T> {
    let mut dx = Tensor::zeros(&cache.input_shape);
    for (g, at) in dy.data().iter().zip(&cache.argmax) {
        dx.data_mut()[*at] += *g;
    }
    dx
}

/// `[B, C, H, W]` to `[B, C]`.
pub fn global_avg_pool_forward<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let (b, c, hw) = channel_dims(x);
    let inv = T::one() / T::of(hw as f64);
    let data = x
        .data()
        .chunks_exact(hw)
        .map(|plane| plane.iter().copied().sum::<T>() * inv)
        .collect();
    Tensor::from_vec(&[b, c], data).expect("pooled shape")
}

pub fn global_avg_pool_backward<T: Real>(dy: &Tensor<T>, input_shape: &[usize]) -> Tensor<T> {
    let hw = input_shape[2] * input_shape[3];
    let inv = T::one() / T::of(hw as f64);
    let mut dx = Tensor::zeros(input_shape);
    dx.data_mut()
        .chunks_exact_mut(hw)
        .zip(dy.data())
        .for_each(|(plane, g)| plane.fill(*g * inv));
    dx
}

/// `y = x w^T + bias` with `x: [B, in]`, `w: [out, in]`.
pub fn linear_forward<T: Real>(x: &Tensor<T>, w: &Tensor<T>, bias: &Tensor<T>) -> Tensor<T> {
    let (b, n_in) = (x.shape()[0], x.shape()[1]);
    let n_out = w.shape()[0];
    let mut y = Tensor::zeros(&[b, n_out]);
    for row in y.data_mut().chunks_exact_mut(n_out) {
        row.copy_from_slice(bias.data());
    }
    gemm(
        T::one(),
        MatRef::new(x.data(), b, n_in),
        MatRef::new(w.data(), n_out, n_in).t(),
        T::one(),
        y.data_mut(),
    );
    y
}

/// Accumulates `dw`, `dbias`; returns `dx`.
pub fn linear_backward<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    dy: &Tensor<T>,
    dw: &mut Tensor<T>,
    dbias: &mut Tensor<T>,
) -> Tensor<T> {
    let (b, n_in) = (x.shape()[0], x.shape()[1]);
    let n_out = w.shape()[0];
    gemm(
        T::one(),
        MatRef::new(dy.data(), b, n_out).t(),
        MatRef::new(x.data(), b, n_in),
        T::one(),
        dw.data_mut(),
    );
    for row in dy.data().chunks_exact(n_out) {
        dbias.data_mut().iter_mut().zip(row).for_each(|(d, g)| *d += *g);
    }
    let mut dx = Tensor::zeros(x.shape());
    gemm(
        T::one(),
        MatRef::new(dy.data(), b, n_out),
        MatRef::new(w.data(), n_out, n_in),
        T::zero(),
        dx.data_mut(),
    );
    dx
}
