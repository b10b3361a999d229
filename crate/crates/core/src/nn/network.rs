use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::layers::{
    batchnorm_backward, batchnorm_forward_eval, batchnorm_forward_train, conv2d_backward, conv2d_forward,
    global_avg_pool_backward, global_avg_pool_forward, linear_backward, linear_forward, maxpool_backward,
    maxpool_forward, relu_backward, relu_forward, BatchNormCache, ConvGeom, MaxPoolCache,
};
use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Batch,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// 3x3 stride-1 stem, no stem pooling.
    Compact,
    /// 7x7 stride-2 stem followed by 3x3 stride-2 max pooling.
    Resnet18,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub input_side: usize,
    pub stem_channels: usize,
    pub stage_channels: Vec<usize>,
    pub blocks_per_stage: usize,
    pub n_classes: usize,
    pub normalization: Normalization,
    pub variant: Variant,
}

impl NetworkConfig {
    /// Stem 16; stages 16/32/64 with two residual blocks each.
    pub fn compact(input_side: usize) -> Self {
        Self {
            input_side,
            stem_channels: 16,
            stage_channels: vec![16, 32, 64],
            blocks_per_stage: 2,
            n_classes: 2,
            normalization: Normalization::Batch,
            variant: Variant::Compact,
        }
    }

    pub fn resnet18(input_side: usize) -> Self {
        Self {
            input_side,
            stem_channels: 64,
            stage_channels: vec![64, 128, 256, 512],
            blocks_per_stage: 2,
            n_classes: 2,
            normalization: Normalization::Batch,
            variant: Variant::Resnet18,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.input_side < 16 {
            return bad("input_side must be at least 16");
        }
        if self.n_classes != 2 {
            return bad("only binary classification is supported (n_classes = 2)");
        }
        if self.stem_channels == 0 || self.blocks_per_stage == 0 || self.stage_channels.is_empty() {
            return bad("stem channels, blocks per stage and stage list must be nonzero");
        }
        if self.stage_channels.contains(&0) {
            return bad("stage channels must be positive");
        }
        if self.stage_channels.windows(2).any(|w| w[1] < w[0]) {
            return bad("stage channels must be nondecreasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct ConvLayer {
    weight: usize,
    geom: ConvGeom,
}

#[derive(Debug, Clone, Copy)]
struct NormLayer {
    gamma: usize,
    beta: usize,
    stats: usize,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    conv1: ConvLayer,
    norm1: Option<NormLayer>,
    conv2: ConvLayer,
    norm2: Option<NormLayer>,
    shortcut: Option<(ConvLayer, Option<NormLayer>)>,
}

#[derive(Debug, Clone)]
struct Architecture {
    stem: ConvLayer,
    stem_norm: Option<NormLayer>,
    stem_pool: bool,
    blocks: Vec<Block>,
    fc_weight: usize,
    fc_bias: usize,
}

/// Running mean and variance of one normalization layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

/// Network parameters, normalization statistics and the layer wiring that
/// indexes into them.
#[derive(Debug, Clone)]
pub struct ModelState<T> {
    config: NetworkConfig,
    arch: Architecture,
    params: Vec<Tensor<T>>,
    param_names: Vec<String>,
    running: Vec<RunningStats<T>>,
}

impl<T: Real> PartialEq for ModelState<T> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params == other.params && self.running == other.running
    }
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    params: Vec<Tensor<f64>>,
    names: Vec<String>,
    n_stats: usize,
    stat_channels: Vec<usize>,
}

impl Builder<'_> {
    fn conv(&mut self, name: String, geom: ConvGeom) -> ConvLayer {
        let fan_in = (geom.in_channels * geom.kernel * geom.kernel) as f64;
        let std = (2.0 / fan_in).sqrt();
        let shape = geom.weight_shape();
        let n: usize = shape.iter().product();
        let data = (0..n)
            .map(|_| std * self.rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.names.push(name);
        self.params.push(Tensor::from_vec(&shape, data).expect("conv weight shape"));
        ConvLayer {
            weight: self.params.len() - 1,
            geom,
        }
    }

    fn norm(&mut self, name: &str, channels: usize, normalization: Normalization) -> Option<NormLayer> {
        if normalization == Normalization::None {
            return None;
        }
        self.names.push(format!("{name}.gamma"));
        self.params.push(Tensor::full(&[channels], 1.0));
        self.names.push(format!("{name}.beta"));
        self.params.push(Tensor::zeros(&[channels]));
        self.stat_channels.push(channels);
        self.n_stats += 1;
        Some(NormLayer {
            gamma: self.params.len() - 2,
            beta: self.params.len() - 1,
            stats: self.n_stats - 1,
        })
    }
}

fn conv3(in_c: usize, out_c: usize, stride: usize) -> ConvGeom {
    ConvGeom {
        in_channels: in_c,
        out_channels: out_c,
        kernel: 3,
        stride,
        pad: 1,
    }
}

/// He-initialized network; normalization scales start at 1, shifts at 0,
/// running means at 0 and running variances at 1.
pub fn init_network<T: Real>(config: &NetworkConfig, seed: u64) -> Result<ModelState<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder {
        rng: &mut rng,
        params: Vec::new(),
        names: Vec::new(),
        n_stats: 0,
        stat_channels: Vec::new(),
    };
    let norm = config.normalization;
    let (stem_geom, stem_pool) = match config.variant {
        Variant::Compact => (conv3(3, config.stem_channels, 1), false),
        Variant::Resnet18 => (
            ConvGeom {
                in_channels: 3,
                out_channels: config.stem_channels,
                kernel: 7,
                stride: 2,
                pad: 3,
            },
            true,
        ),
    };
    let stem = b.conv("stem.conv".into(), stem_geom);
    let stem_norm = b.norm("stem.norm", config.stem_channels, norm);

    let mut blocks = Vec::new();
    let mut in_c = config.stem_channels;
    for (s, &out_c) in config.stage_channels.iter().enumerate() {
        for i in 0..config.blocks_per_stage {
            let stride = if s > 0 && i == 0 { 2 } else { 1 };
            let p = format!("stage{s}.block{i}");
            let conv1 = b.conv(format!("{p}.conv1"), conv3(in_c, out_c, stride));
            let norm1 = b.norm(&format!("{p}.norm1"), out_c, norm);
            let conv2 = b.conv(format!("{p}.conv2"), conv3(out_c, out_c, 1));
            let norm2 = b.norm(&format!("{p}.norm2"), out_c, norm);
            let shortcut = (stride != 1 || in_c != out_c).then(|| {
                let c = b.conv(
                    format!("{p}.shortcut.conv"),
                    ConvGeom {
                        in_channels: in_c,
                        out_channels: out_c,
                        kernel: 1,
                        stride,
                        pad: 0,
                    },
                );
                (c, b.norm(&format!("{p}.shortcut.norm"), out_c, norm))
            });
            blocks.push(Block {
                conv1,
                norm1,
                conv2,
                norm2,
                shortcut,
            });
            in_c = out_c;
        }
    }

    let bound = 1.0 / (in_c as f64).sqrt();
    let fc: Vec<f64> = (0..config.n_classes * in_c)
        .map(|_| b.rng.random_range(-bound..bound))
        .collect();
    b.names.push("fc.weight".into());
    b.params.push(Tensor::from_vec(&[config.n_classes, in_c], fc).expect("fc shape"));
    b.names.push("fc.bias".into());
    b.params.push(Tensor::zeros(&[config.n_classes]));

    let arch = Architecture {
        stem,
        stem_norm,
        stem_pool,
        blocks,
        fc_weight: b.params.len() - 2,
        fc_bias: b.params.len() - 1,
    };
    let running = b
        .stat_channels
        .iter()
        .map(|&c| RunningStats {
            mean: vec![T::zero(); c],
            var: vec![T::one(); c],
        })
        .collect();
    Ok(ModelState {
        config: config.clone(),
        arch,
        params: b.params.iter().map(Tensor::cast).collect(),
        param_names: b.names,
        running,
    })
}

/// Intermediate values kept by a training-mode forward pass for backward.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    batch: usize,
    input: Tensor<T>,
    stem_norm: Option<BatchNormCache<T>>,
    stem_out: Tensor<T>,
    pool: Option<MaxPoolCache>,
    blocks: Vec<BlockCache<T>>,
    gap_input_shape: Vec<usize>,
    features: Tensor<T>,
}

impl<T> ForwardCache<T> {
    pub fn batch_size(&self) -> usize {
        self.batch
    }
}

#[derive(Debug, Clone)]
struct BlockCache<T> {
    input: Tensor<T>,
    norm1: Option<BatchNormCache<T>>,
    act1: Tensor<T>,
    norm2: Option<BatchNormCache<T>>,
    shortcut_norm: Option<BatchNormCache<T>>,
    out: Tensor<T>,
}

enum Pass<'a, T> {
    Train(&'a mut [RunningStats<T>]),
    Eval(&'a [RunningStats<T>]),
}

fn normalize<T: Real>(
    x: Tensor<T>,
    layer: Option<NormLayer>,
    params: &[Tensor<T>],
    pass: &mut Pass<'_, T>,
) -> (Tensor<T>, Option<BatchNormCache<T>>) {
    let Some(n) = layer else {
        return (x, None);
    };
    let (gamma, beta) = (params[n.gamma].data(), params[n.beta].data());
    match pass {
        Pass::Train(running) => {
            let rs = &mut running[n.stats];
            let (y, cache) = batchnorm_forward_train(
                &x,
                gamma,
                beta,
                &mut rs.mean,
                &mut rs.var,
                T::of(BN_MOMENTUM),
                T::of(BN_EPS),
            );
            (y, Some(cache))
        }
        Pass::Eval(running) => {
            let rs = &running[n.stats];
            (batchnorm_forward_eval(&x, gamma, beta, &rs.mean, &rs.var, T::of(BN_EPS)), None)
        }
    }
}

fn run_forward<T: Real>(
    arch: &Architecture,
    params: &[Tensor<T>],
    mut pass: Pass<'_, T>,
    x: &Tensor<T>,
    keep: bool,
) -> (Tensor<T>, Option<ForwardCache<T>>) {
    let h = conv2d_forward(x, &params[arch.stem.weight], &arch.stem.geom);
    let (mut h, stem_norm) = normalize(h, arch.stem_norm, params, &mut pass);
    relu_forward(&mut h);
    let stem_out = if keep { h.clone() } else { Tensor::zeros(&[1]) };
    let (mut h, pool) = if arch.stem_pool {
        let (y, c) = maxpool_forward(&h, 3, 2, 1);
        (y, Some(c))
    } else {
        (h, None)
    };

    let mut block_caches = Vec::with_capacity(if keep { arch.blocks.len() } else { 0 });
    for blk in &arch.blocks {
        let input = h;
        let z = conv2d_forward(&input, &params[blk.conv1.weight], &blk.conv1.geom);
        let (mut act1, norm1) = normalize(z, blk.norm1, params, &mut pass);
        relu_forward(&mut act1);
        let z = conv2d_forward(&act1, &params[blk.conv2.weight], &blk.conv2.geom);
        let (mut out, norm2) = normalize(z, blk.norm2, params, &mut pass);
        let shortcut_norm = match blk.shortcut {
            Some((conv, norm)) => {
                let s = conv2d_forward(&input, &params[conv.weight], &conv.geom);
                let (s, c) = normalize(s, norm, params, &mut pass);
                out.add_assign(&s);
                c
            }
            None => {
                out.add_assign(&input);
                None
            }
        };
        relu_forward(&mut out);
        if keep {
            block_caches.push(BlockCache {
                input,
                norm1,
                act1,
                norm2,
                shortcut_norm,
                out: out.clone(),
            });
        }
        h = out;
    }

    let gap_input_shape = h.shape().to_vec();
    let features = global_avg_pool_forward(&h);
    let logits = linear_forward(&features, &params[arch.fc_weight], &params[arch.fc_bias]);
    let cache = keep.then(|| ForwardCache {
        batch: x.shape()[0],
        input: x.clone(),
        stem_norm,
        stem_out,
        pool,
        blocks: block_caches,
        gap_input_shape,
        features,
    });
    (logits, cache)
}

fn norm_backward<T: Real>(
    dy: Tensor<T>,
    layer: Option<NormLayer>,
    cache: &Option<BatchNormCache<T>>,
    params: &[Tensor<T>],
    grads: &mut [Tensor<T>],
) -> Tensor<T> {
    match (layer, cache) {
        (Some(n), Some(c)) => {
            let mut dgamma = std::mem::replace(&mut grads[n.gamma], Tensor::zeros(&[1]));
            let dx = batchnorm_backward(&dy, params[n.gamma].data(), c, dgamma.data_mut(), grads[n.beta].data_mut());
            grads[n.gamma] = dgamma;
            dx
        }
        _ => dy,
    }
}

impl<T: Real> ModelState<T> {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn running_stats(&self) -> &[RunningStats<T>] {
        &self.running
    }

    pub fn running_stats_mut(&mut self) -> &mut [RunningStats<T>] {
        &mut self.running
    }

    /// Total number of trainable scalars.
    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(Tensor::is_finite)
            && self
                .running
                .iter()
                .all(|r| r.mean.iter().chain(&r.var).all(|v| v.is_finite()))
    }

    pub fn input_shape(&self, batch: usize) -> [usize; 4] {
        [batch, 3, self.config.input_side, self.config.input_side]
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let b = x.shape().first().copied().unwrap_or(0);
        x.expect_shape(&self.input_shape(b.max(1)))
    }

    /// Training-mode pass: minibatch normalization statistics, running
    /// statistics updated, cache kept for [`ModelState::backward`].
    pub fn forward_train(&mut self, x: &Tensor<T>) -> Result<(Tensor<T>, ForwardCache<T>)> {
        self.check_input(x)?;
        let (logits, cache) = run_forward(&self.arch, &self.params, Pass::Train(&mut self.running), x, true);
        Ok((logits, cache.expect("cache kept in training mode")))
    }

    /// Inference pass on running statistics. Never mutates the model.
    pub fn forward_eval(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        Ok(run_forward(&self.arch, &self.params, Pass::Eval(&self.running), x, false).0)
    }

    /// Training-mode pass that leaves the running statistics untouched.
    /// Used by gradient checks, which evaluate the loss many times.
    pub fn forward_train_frozen(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ForwardCache<T>)> {
        self.check_input(x)?;
        let mut scratch = self.running.clone();
        let (logits, cache) = run_forward(&self.arch, &self.params, Pass::Train(&mut scratch), x, true);
        Ok((logits, cache.expect("cache kept in training mode")))
    }

    /// Parameter gradients, ordered like [`ModelState::params`].
    pub fn backward(&self, cache: &ForwardCache<T>, dlogits: &Tensor<T>) -> Result<Vec<Tensor<T>>> {
        if dlogits.shape() != [cache.batch, self.config.n_classes] {
            return Err(Error::InvalidState(format!(
                "upstream gradient shape {:?} does not match cached batch of {}",
                dlogits.shape(),
                cache.batch
            )));
        }
        let arch = &self.arch;
        let params = &self.params;
        let mut grads: Vec<Tensor<T>> = params.iter().map(Tensor::zeros_like).collect();

        let (mut dw, mut db) = (
            std::mem::replace(&mut grads[arch.fc_weight], Tensor::zeros(&[1])),
            std::mem::replace(&mut grads[arch.fc_bias], Tensor::zeros(&[1])),
        );
        let dfeat = linear_backward(&cache.features, &params[arch.fc_weight], dlogits, &mut dw, &mut db);
        grads[arch.fc_weight] = dw;
        grads[arch.fc_bias] = db;
        let mut dh = global_avg_pool_backward(&dfeat, &cache.gap_input_shape);

        for (blk, bc) in arch.blocks.iter().zip(&cache.blocks).rev() {
            relu_backward(&bc.out, &mut dh);
            let d_short = match blk.shortcut {
                Some((conv, norm)) => {
                    let ds = norm_backward(dh.clone(), norm, &bc.shortcut_norm, params, &mut grads);
                    let mut dwc = std::mem::replace(&mut grads[conv.weight], Tensor::zeros(&[1]));
                    let dx = conv2d_backward(&bc.input, &params[conv.weight], &conv.geom, &ds, &mut dwc, true);
                    grads[conv.weight] = dwc;
                    dx.expect("input gradient requested")
                }
                None => dh.clone(),
            };
            let dz2 = norm_backward(dh, blk.norm2, &bc.norm2, params, &mut grads);
            let mut dw2 = std::mem::replace(&mut grads[blk.conv2.weight], Tensor::zeros(&[1]));
            let mut da1 = conv2d_backward(&bc.act1, &params[blk.conv2.weight], &blk.conv2.geom, &dz2, &mut dw2, true)
                .expect("input gradient requested");
            grads[blk.conv2.weight] = dw2;
            relu_backward(&bc.act1, &mut da1);
            let dz1 = norm_backward(da1, blk.norm1, &bc.norm1, params, &mut grads);
            let mut dw1 = std::mem::replace(&mut grads[blk.conv1.weight], Tensor::zeros(&[1]));
            let mut dx = conv2d_backward(&bc.input, &params[blk.conv1.weight], &blk.conv1.geom, &dz1, &mut dw1, true)
                .expect("input gradient requested");
            grads[blk.conv1.weight] = dw1;
            dx.add_assign(&d_short);
            dh = dx;
        }

        if let Some(pc) = &cache.pool {
            dh = maxpool_backward(&dh, pc);
        }
        relu_backward(&cache.stem_out, &mut dh);
        let dz = norm_backward(dh, arch.stem_norm, &cache.stem_norm, params, &mut grads);
        let mut dws = std::mem::replace(&mut grads[arch.stem.weight], Tensor::zeros(&[1]));
        conv2d_backward(&cache.input, &params[arch.stem.weight], &arch.stem.geom, &dz, &mut dws, false);
        grads[arch.stem.weight] = dws;
        Ok(grads)
    }

    /// Same network at another precision.
    pub fn cast<U: Real>(&self) -> ModelState<U> {
        ModelState {
            config: self.config.clone(),
            arch: self.arch.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            param_names: self.param_names.clone(),
            running: self
                .running
                .iter()
                .map(|r| RunningStats {
                    mean: r.mean.iter().map(|v| U::of(v.to_f64().unwrap())).collect(),
                    var: r.var.iter().map(|v| U::of(v.to_f64().unwrap())).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NetworkConfig {
        NetworkConfig {
            input_side: 16,
            stem_channels: 4,
            stage_channels: vec![4, 8],
            blocks_per_stage: 1,
            ..NetworkConfig::compact(16)
        }
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_network::<f32>(&tiny(), 5).unwrap();
        let b = init_network::<f32>(&tiny(), 5).unwrap();
        let c = init_network::<f32>(&tiny(), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn running_stats_start_at_identity() {
        let m = init_network::<f32>(&NetworkConfig::compact(30), 0).unwrap();
        for r in m.running_stats() {
            assert!(r.var.iter().all(|v| *v == 1.0));
            assert!(r.mean.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = tiny();
        c.input_side = 8;
        assert!(init_network::<f32>(&c, 0).is_err());
        let mut c = tiny();
        c.stage_channels = vec![8, 4];
        assert!(init_network::<f32>(&c, 0).is_err());
        let mut c = tiny();
        c.n_classes = 3;
        assert!(init_network::<f32>(&c, 0).is_err());
    }

    #[test]
    fn forward_shapes_and_eval_purity() {
        let mut m = init_network::<f32>(&NetworkConfig::compact(50), 1).unwrap();
        let x = Tensor::from_vec(&m.input_shape(8), (0..8 * 3 * 2500).map(|i| ((i % 7) as f32) / 7.0).collect()).unwrap();
        let a = m.forward_eval(&x).unwrap();
        assert_eq!(a.shape(), &[8, 2]);
        let b = m.forward_eval(&x).unwrap();
        assert_eq!(a, b);
        let before = m.clone();
        let (t, _) = m.forward_train(&x).unwrap();
        assert_eq!(t.shape(), &[8, 2]);
        assert_ne!(before.running_stats(), m.running_stats());
        assert_eq!(before.params(), m.params());
    }

    #[test]
    fn zero_input_gives_finite_logits() {
        let mut m = init_network::<f32>(&NetworkConfig::compact(30), 2).unwrap();
        let x = Tensor::zeros(&m.input_shape(2));
        assert!(m.forward_eval(&x).unwrap().is_finite());
        let (logits, cache) = m.forward_train(&x).unwrap();
        assert!(logits.is_finite());
        let grads = m.backward(&cache, &Tensor::full(&[2, 2], 0.5)).unwrap();
        assert!(grads.iter().all(Tensor::is_finite));
    }

    #[test]
    fn shape_error_names_expected_and_actual() {
        let m = init_network::<f32>(&tiny(), 0).unwrap();
        let err = m.forward_eval(&Tensor::zeros(&[1, 3, 20, 20])).unwrap_err();
        match err {
            Error::Shape { expected, actual } => {
                assert_eq!(expected, vec![1, 3, 16, 16]);
                assert_eq!(actual, vec![1, 3, 20, 20]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let m = init_network::<f64>(&tiny(), 3).unwrap();
        let x = Tensor::from_vec(&m.input_shape(2), (0..2 * 3 * 256).map(|i| ((i * 31 % 17) as f64) / 17.0).collect()).unwrap();
        let (_, cache) = m.forward_train_frozen(&x).unwrap();
        let grads = m.backward(&cache, &Tensor::zeros(&[2, 2])).unwrap();
        assert!(grads.iter().all(|g| g.data().iter().all(|v| *v == 0.0)));
        assert!(m.backward(&cache, &Tensor::zeros(&[3, 2])).is_err());
    }

    #[test]
    fn resnet18_variant_runs() {
        let mut cfg = NetworkConfig::resnet18(32);
        cfg.stem_channels = 8;
        cfg.stage_channels = vec![8, 8, 16, 16];
        let mut m = init_network::<f32>(&cfg, 0).unwrap();
        let x = Tensor::full(&m.input_shape(2), 0.5);
        let (y, cache) = m.forward_train(&x).unwrap();
        assert_eq!(y.shape(), &[2, 2]);
        let g = m.backward(&cache, &Tensor::full(&[2, 2], 1.0)).unwrap();
        assert_eq!(g.len(), m.params().len());
    }
}
