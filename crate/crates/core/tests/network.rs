use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sstml::encoder::{BinaryImage, ImageChunk, StmlEncoder, WHITE};
use sstml::nn::{checkpoint, init_network, predict, train_one_epoch, NetworkConfig, SgdMomentum, Tensor};
use sstml::streams::{ConceptOptions, StreamConfig, SyntheticStream};

/// Hand count straight from the layer shapes: bias-free convolutions, a scale
/// and a shift per normalized channel, and a biased classifier.
fn hand_count(stem: usize, stages: &[usize], blocks: usize) -> usize {
    let conv = |k: usize, cin: usize, cout: usize| k * k * cin * cout;
    let norm = |c: usize| 2 * c;
    let mut total = conv(3, 3, stem) + norm(stem);
    let mut cin = stem;
    for (s, &cout) in stages.iter().enumerate() {
        for b in 0..blocks {
            let stride2 = s > 0 && b == 0;
            total += conv(3, cin, cout) + norm(cout) + conv(3, cout, cout) + norm(cout);
            if stride2 || cin != cout {
                total += conv(1, cin, cout) + norm(cout);
            }
            cin = cout;
        }
    }
    total + 2 * cin + 2
}

#[test]
fn compact_parameter_count_matches_hand_count() {
    let model = init_network::<f32>(&NetworkConfig::compact(50), 0).unwrap();
    assert_eq!(model.parameter_count(), hand_count(16, &[16, 32, 64], 2));
    assert_eq!(model.parameter_count(), 174_738);
}

#[test]
fn resnet18_parameter_count_matches_hand_count() {
    // 7x7 stem instead of 3x3: subtract the 3x3 stem and add the 7x7 one.
    let model = init_network::<f32>(&NetworkConfig::resnet18(32), 0).unwrap();
    let expected = hand_count(64, &[64, 128, 256, 512], 2) - 9 * 3 * 64 + 49 * 3 * 64;
    assert_eq!(model.parameter_count(), expected);
}

fn random_image_chunk(n: usize, side: usize, seed: u64) -> ImageChunk {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = (0..n)
        .map(|_| BinaryImage {
            side,
            pixels: (0..side * side).map(|_| if rng.random_bool(0.2) { WHITE } else { 0 }).collect(),
        })
        .collect();
    let labels = (0..n).map(|i| u8::from(i % 5 == 0)).collect();
    ImageChunk { chunk_index: 3, side, images, labels }
}

fn tiny() -> NetworkConfig {
    NetworkConfig {
        stem_channels: 4,
        stage_channels: vec![4, 8],
        blocks_per_stage: 1,
        ..NetworkConfig::compact(16)
    }
}

#[test]
fn one_epoch_makes_ceil_n_over_b_updates() {
    for (n, b, expected) in [(250, 8, 32), (16, 8, 2), (7, 8, 1), (9, 4, 3)] {
        let chunk = random_image_chunk(n, 16, n as u64);
        let mut model = init_network::<f32>(&tiny(), 1).unwrap();
        let mut opt = SgdMomentum::new(model.params(), 0.001, 0.9).unwrap();
        let report = train_one_epoch(&mut model, &mut opt, &chunk, b, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(report.minibatches, expected);
        assert_eq!(opt.steps(), expected);
        assert!(report.mean_loss.is_finite() && report.mean_loss >= 0.0);
    }
}

#[test]
fn training_is_deterministic() {
    let chunk = random_image_chunk(40, 16, 5);
    let run = || {
        let mut model = init_network::<f32>(&tiny(), 9).unwrap();
        let mut opt = SgdMomentum::new(model.params(), 0.001, 0.9).unwrap();
        train_one_epoch(&mut model, &mut opt, &chunk, 8, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        model
    };
    assert_eq!(run(), run());
}

#[test]
fn single_class_chunk_trains_and_flags() {
    let mut chunk = random_image_chunk(12, 16, 6);
    chunk.labels = vec![0; 12];
    let mut model = init_network::<f32>(&tiny(), 1).unwrap();
    let mut opt = SgdMomentum::new(model.params(), 0.001, 0.9).unwrap();
    let r = train_one_epoch(&mut model, &mut opt, &chunk, 8, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(r.absent_class, Some(1));
    assert_eq!(r.class_weights, [0.5, 0.0]);
    assert!(model.is_finite());
}

#[test]
fn predict_is_pure_and_normalized() {
    let chunk = random_image_chunk(50, 16, 7);
    let mut model = init_network::<f32>(&tiny(), 3).unwrap();
    let mut opt = SgdMomentum::new(model.params(), 0.01, 0.9).unwrap();
    train_one_epoch(&mut model, &mut opt, &chunk, 8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let before = model.clone();
    let a = predict(&model, &chunk).unwrap();
    let b = predict(&model, &chunk).unwrap();
    assert_eq!(a, b);
    assert_eq!(model, before);
    for (s, l) in a.scores.iter().zip(&a.labels) {
        assert!((s[0] + s[1] - 1.0).abs() < 1e-6);
        assert_eq!(*l, u8::from(s[1] > s[0]));
    }
}

#[test]
fn checkpoint_file_round_trip_preserves_predictions() {
    let chunk = random_image_chunk(20, 16, 8);
    let mut model = init_network::<f32>(&tiny(), 4).unwrap();
    let mut opt = SgdMomentum::new(model.params(), 0.01, 0.9).unwrap();
    train_one_epoch(&mut model, &mut opt, &chunk, 8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    checkpoint::save(&model, &path).unwrap();
    let back = checkpoint::load::<f32>(&path).unwrap();
    assert_eq!(back, model);
    assert_eq!(predict(&back, &chunk).unwrap(), predict(&model, &chunk).unwrap());
    assert!(checkpoint::load::<f32>(&dir.path().join("missing.bin")).is_err());
}

#[test]
fn all_zero_input_gives_finite_gradients() {
    let model = init_network::<f32>(&tiny(), 2).unwrap();
    let x = Tensor::<f32>::zeros(&model.input_shape(4));
    let (logits, cache) = model.forward_train_frozen(&x).unwrap();
    assert!(logits.is_finite());
    let grads = model.backward(&cache, &Tensor::full(&[4, 2], 0.25)).unwrap();
    assert!(grads.iter().all(Tensor::is_finite));
}

#[test]
fn second_epoch_loss_does_not_exceed_first() {
    let mut improved = 0;
    for trial in 0..20u64 {
        let stream = SyntheticStream::new(StreamConfig {
            n_chunks: 1,
            chunk_size: 64,
            n_features: 2,
            minority_fraction: 0.25,
            label_noise: 0.0,
            n_drifts: 0,
            seed: 100 + trial,
            concept: ConceptOptions {
                clusters_per_class: 1,
                min_separation: 0.5,
                ..ConceptOptions::default()
            },
            ..StreamConfig::default()
        })
        .unwrap();
        let images = StmlEncoder::new(2, 30).unwrap().encode_chunk(&stream.chunk(0).unwrap()).unwrap();
        let mut model = init_network::<f32>(&NetworkConfig::compact(30), trial).unwrap();
        let mut opt = SgdMomentum::new(model.params(), 0.001, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let first = train_one_epoch(&mut model, &mut opt, &images, 8, &mut rng).unwrap();
        let second = train_one_epoch(&mut model, &mut opt, &images, 8, &mut rng).unwrap();
        if second.mean_loss <= first.mean_loss {
            improved += 1;
        }
    }
    assert!(improved >= 18, "second epoch improved in {improved} of 20 trials");
}
