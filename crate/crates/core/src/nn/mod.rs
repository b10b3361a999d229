//! Residual convolutional network, trained from scratch with momentum SGD.

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod network;
pub mod optim;
pub mod tensor;
pub mod train;

pub use loss::{class_weights, weighted_cross_entropy, ClassWeights};
pub use network::{
    init_network, ForwardCache, ModelState, NetworkConfig, Normalization, RunningStats, Variant,
};
pub use optim::SgdMomentum;
pub use tensor::{Real, Tensor};
pub use train::{images_to_batch, predict, train_one_epoch, LossReport, Predictions};
