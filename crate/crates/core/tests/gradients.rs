use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sstml::nn::gradcheck::{central_difference, check_network_gradients, relative_error};
use sstml::nn::layers::*;
use sstml::nn::{init_network, weighted_cross_entropy, NetworkConfig, Tensor};

const STEP: f64 = 1e-5;
const TOL_F64: f64 = 1e-6;

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Values bounded away from zero, so ReLU kinks sit far outside the step.
fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let m = rng.random_range(0.05..1.0);
            if rng.random::<bool>() { m } else { -m }
        })
        .collect();
    Tensor::from_vec(shape, data).unwrap()
}

fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn with_data(shape: &[usize], v: &[f64]) -> Tensor<f64> {
    Tensor::from_vec(shape, v.to_vec()).unwrap()
}

fn assert_close(name: &str, analytic: &[f64], numeric: &[f64]) {
    let e = relative_error(analytic, numeric);
    assert!(e < TOL_F64, "{name}: relative error {e:e}");
}

#[test]
fn conv2d_input_and_weight_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for g in [
        ConvGeom { in_channels: 2, out_channels: 3, kernel: 3, stride: 1, pad: 1 },
        ConvGeom { in_channels: 3, out_channels: 2, kernel: 3, stride: 2, pad: 1 },
        ConvGeom { in_channels: 2, out_channels: 4, kernel: 1, stride: 2, pad: 0 },
        ConvGeom { in_channels: 1, out_channels: 2, kernel: 7, stride: 2, pad: 3 },
    ] {
        let xs = [2, g.in_channels, 9, 9];
        let ws = g.weight_shape();
        let x = random_tensor(&xs, &mut rng);
        let w = random_tensor(&ws, &mut rng);
        let y = conv2d_forward(&x, &w, &g);
        let r = random_tensor(y.shape(), &mut rng);

        let mut dw = Tensor::zeros(&ws);
        let dx = conv2d_backward(&x, &w, &g, &r, &mut dw, true).unwrap();
        let num_x = central_difference(x.data(), STEP, |v| dot(&conv2d_forward(&with_data(&xs, v), &w, &g), &r));
        let num_w = central_difference(w.data(), STEP, |v| dot(&conv2d_forward(&x, &with_data(&ws, v), &g), &r));
        assert_close("conv dx", dx.data(), &num_x);
        assert_close("conv dw", dw.data(), &num_w);
    }
}

#[test]
fn batchnorm_training_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let xs = [3, 4, 5, 5];
    let x = random_tensor(&xs, &mut rng);
    let gamma: Vec<f64> = (0..4).map(|_| rng.random_range(0.5..1.5)).collect();
    let beta: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
    let r = random_tensor(&xs, &mut rng);
    let forward = |x: &Tensor<f64>, g: &[f64], b: &[f64]| {
        let (mut m, mut v) = (vec![0.0; 4], vec![1.0; 4]);
        batchnorm_forward_train(x, g, b, &mut m, &mut v, 0.1, 1e-5)
    };

    let (_, cache) = forward(&x, &gamma, &beta);
    let (mut dg, mut db) = (vec![0.0; 4], vec![0.0; 4]);
    let dx = batchnorm_backward(&r, &gamma, &cache, &mut dg, &mut db);

    let num_x = central_difference(x.data(), STEP, |v| dot(&forward(&with_data(&xs, v), &gamma, &beta).0, &r));
    let num_g = central_difference(&gamma, STEP, |v| dot(&forward(&x, v, &beta).0, &r));
    let num_b = central_difference(&beta, STEP, |v| dot(&forward(&x, &gamma, v).0, &r));
    assert_close("bn dx", dx.data(), &num_x);
    assert_close("bn dgamma", &dg, &num_g);
    assert_close("bn dbeta", &db, &num_b);
}

#[test]
fn relu_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = [2, 3, 4, 4];
    let x = away_from_zero(&xs, &mut rng);
    let r = random_tensor(&xs, &mut rng);
    let f = |v: &[f64]| {
        let mut y = with_data(&xs, v);
        relu_forward(&mut y);
        dot(&y, &r)
    };
    let mut y = x.clone();
    relu_forward(&mut y);
    let mut dx = r.clone();
    relu_backward(&y, &mut dx);
    assert_close("relu dx", dx.data(), &central_difference(x.data(), STEP, f));
}

#[test]
fn residual_add_gradient() {
    // out = relu(a + b); both branches receive the masked upstream gradient.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = [2, 3, 4, 4];
    let a = away_from_zero(&s, &mut rng);
    let b = random_tensor(&s, &mut rng).data().iter().map(|v| v * 0.01).collect::<Vec<_>>();
    let r = random_tensor(&s, &mut rng);
    let f = |av: &[f64], bv: &[f64]| {
        let mut y = with_data(&s, av);
        y.add_assign(&with_data(&s, bv));
        relu_forward(&mut y);
        dot(&y, &r)
    };
    let mut y = a.clone();
    y.add_assign(&with_data(&s, &b));
    relu_forward(&mut y);
    let mut d = r.clone();
    relu_backward(&y, &mut d);
    assert_close("residual da", d.data(), &central_difference(a.data(), STEP, |v| f(v, &b)));
    assert_close("residual db", d.data(), &central_difference(&b, STEP, |v| f(a.data(), v)));
}

#[test]
fn pooling_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs = [2, 2, 7, 7];
    // Distinct values keep every window maximum unique under the probe step.
    let mut values: Vec<f64> = (0..xs.iter().product::<usize>()).map(|i| i as f64 * 0.01).collect();
    use rand::seq::SliceRandom;
    values.shuffle(&mut rng);
    let x = with_data(&xs, &values);

    let (y, cache) = maxpool_forward(&x, 3, 2, 1);
    let r = random_tensor(y.shape(), &mut rng);
    let dx = maxpool_backward(&r, &cache);
    let num = central_difference(x.data(), STEP, |v| dot(&maxpool_forward(&with_data(&xs, v), 3, 2, 1).0, &r));
    assert_close("maxpool dx", dx.data(), &num);

    let y = global_avg_pool_forward(&x);
    let r = random_tensor(y.shape(), &mut rng);
    let dx = global_avg_pool_backward(&r, &xs);
    let num = central_difference(x.data(), STEP, |v| dot(&global_avg_pool_forward(&with_data(&xs, v)), &r));
    assert_close("gap dx", dx.data(), &num);
}

#[test]
fn linear_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_tensor(&[4, 6], &mut rng);
    let w = random_tensor(&[2, 6], &mut rng);
    let b = random_tensor(&[2], &mut rng);
    let r = random_tensor(&[4, 2], &mut rng);
    let (mut dw, mut db) = (Tensor::zeros(&[2, 6]), Tensor::zeros(&[2]));
    let dx = linear_backward(&x, &w, &r, &mut dw, &mut db);
    let f = |x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>| dot(&linear_forward(x, w, b), &r);
    assert_close("linear dx", dx.data(), &central_difference(x.data(), STEP, |v| f(&with_data(&[4, 6], v), &w, &b)));
    assert_close("linear dw", dw.data(), &central_difference(w.data(), STEP, |v| f(&x, &with_data(&[2, 6], v), &b)));
    assert_close("linear db", db.data(), &central_difference(b.data(), STEP, |v| f(&x, &w, &with_data(&[2], v))));
}

#[test]
fn weighted_cross_entropy_gradient_on_random_logits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let z = random_tensor(&[8, 2], &mut rng).data().iter().map(|v| 3.0 * v).collect::<Vec<_>>();
        let labels: Vec<u8> = (0..8).map(|_| rng.random_range(0..2)).collect();
        let w = [rng.random_range(0.1..3.0), rng.random_range(0.1..3.0)];
        let (_, g) = weighted_cross_entropy(&with_data(&[8, 2], &z), &labels, &w).unwrap();
        let num = central_difference(&z, STEP, |v| {
            weighted_cross_entropy(&with_data(&[8, 2], v), &labels, &w).unwrap().0
        });
        assert_close("loss dlogits", g.data(), &num);
    }
}

fn reduced() -> NetworkConfig {
    NetworkConfig {
        input_side: 16,
        stem_channels: 4,
        stage_channels: vec![4, 8],
        blocks_per_stage: 1,
        ..NetworkConfig::compact(16)
    }
}

fn binary_batch(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..256).map(|_| f64::from(u8::from(rng.random_bool(0.3)))).collect())
        .collect();
    plane.iter().flat_map(|p| p.iter().cycle().take(3 * 256).copied()).collect()
}

#[test]
fn reduced_network_gradients_double_precision() {
    let model = init_network::<f64>(&reduced(), 11).unwrap();
    let x = Tensor::from_vec(&[2, 3, 16, 16], binary_batch(12)).unwrap();
    let checks = check_network_gradients(&model, &x, &[0, 1], STEP).unwrap();
    assert_eq!(checks.len(), model.params().len());
    for c in &checks {
        assert!(c.relative_error < TOL_F64, "{}: {:e}", c.name, c.relative_error);
    }
}

#[test]
fn reduced_network_gradients_single_precision() {
    let model = init_network::<f32>(&reduced(), 13).unwrap();
    let x = Tensor::from_vec(&[2, 3, 16, 16], binary_batch(14)).unwrap().cast::<f32>();
    for c in check_network_gradients(&model, &x, &[1, 0], STEP).unwrap() {
        assert!(c.relative_error < 1e-4, "{}: {:e}", c.name, c.relative_error);
    }
}

#[test]
fn unnormalized_network_gradients() {
    let cfg = NetworkConfig {
        normalization: sstml::nn::Normalization::None,
        ..reduced()
    };
    let model = init_network::<f64>(&cfg, 15).unwrap();
    let x = Tensor::from_vec(&[2, 3, 16, 16], binary_batch(16)).unwrap();
    for c in check_network_gradients(&model, &x, &[0, 1], STEP).unwrap() {
        assert!(c.relative_error < TOL_F64, "{}: {:e}", c.name, c.relative_error);
    }
}
