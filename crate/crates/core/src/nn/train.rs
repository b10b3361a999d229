use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{class_weights, weighted_cross_entropy};
use super::network::ModelState;
use super::optim::SgdMomentum;
use super::tensor::{Real, Tensor};
use crate::encoder::{BinaryImage, ImageChunk};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub chunk_index: usize,
    pub mean_loss: f64,
    pub minibatches: usize,
    pub class_weights: [f64; 2],
    /// Set when the chunk held a single class.
    pub absent_class: Option<u8>,
}

/// Stacks images into a `[B, 3, S, S]` batch: pixel / 255, the grayscale plane
/// copied into all three channels.
pub fn images_to_batch<T: Real>(images: &[&BinaryImage], side: usize) -> Result<Tensor<T>> {
    let plane = side * side;
    let mut data = Vec::with_capacity(images.len() * 3 * plane);
    for img in images {
        if img.side != side {
            return Err(Error::Shape {
                expected: vec![side, side],
                actual: vec![img.side, img.side],
            });
        }
        let channel: Vec<T> = img.pixels.iter().map(|p| T::of(f64::from(*p) / 255.0)).collect();
        for _ in 0..3 {
            data.extend_from_slice(&channel);
        }
    }
    Tensor::from_vec(&[images.len(), 3, side, side], data)
}

/// One pass over the chunk in shuffled minibatches. The last minibatch may be
/// partial and is trained too.
pub fn train_one_epoch<T: Real, R: Rng + ?Sized>(
    model: &mut ModelState<T>,
    opt: &mut SgdMomentum<T>,
    chunk: &ImageChunk,
    batch_size: usize,
    rng: &mut R,
) -> Result<LossReport> {
    if chunk.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty chunk".into()));
    }
    if batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    let cw = class_weights(&chunk.labels)?;
    let mut order: Vec<usize> = (0..chunk.len()).collect();
    order.shuffle(rng);

    let side = model.config().input_side;
    let mut total_loss = 0.0;
    let mut minibatches = 0;
    for idx in order.chunks(batch_size) {
        let imgs: Vec<&BinaryImage> = idx.iter().map(|&i| &chunk.images[i]).collect();
        let labels: Vec<u8> = idx.iter().map(|&i| chunk.labels[i]).collect();
        let x = images_to_batch::<T>(&imgs, side)?;
        let (logits, cache) = model.forward_train(&x)?;
        let (loss, dlogits) = weighted_cross_entropy(&logits, &labels, &cw.weights)?;
        let grads = model.backward(&cache, &dlogits)?;
        opt.step(model.params_mut(), &grads)?;
        total_loss += loss;
        minibatches += 1;
    }
    Ok(LossReport {
        chunk_index: chunk.chunk_index,
        mean_loss: total_loss / minibatches as f64,
        minibatches,
        class_weights: cw.weights,
        absent_class: cw.absent_class,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<u8>,
    /// Softmax probabilities, one row per instance.
    pub scores: Vec<[f64; 2]>,
}

const EVAL_BATCH: usize = 32;

/// Inference on running statistics. Ties go to class 0.
pub fn predict<T: Real>(model: &ModelState<T>, chunk: &ImageChunk) -> Result<Predictions> {
    let side = model.config().input_side;
    let mut labels = Vec::with_capacity(chunk.len());
    let mut scores = Vec::with_capacity(chunk.len());
    for imgs in chunk.images.chunks(EVAL_BATCH) {
        let refs: Vec<&BinaryImage> = imgs.iter().collect();
        let logits = model.forward_eval(&images_to_batch::<T>(&refs, side)?)?;
        for row in logits.data().chunks_exact(2) {
            let (z0, z1) = (row[0].to_f64().unwrap(), row[1].to_f64().unwrap());
            let m = z0.max(z1);
            let (e0, e1) = ((z0 - m).exp(), (z1 - m).exp());
            scores.push([e0 / (e0 + e1), e1 / (e0 + e1)]);
            labels.push(u8::from(z1 > z0));
        }
    }
    Ok(Predictions { labels, scores })
}
