//! Streaming binary classification on drifting, imbalanced data by rendering
//! tabular chunks as binary images and training a small residual network.

pub mod baselines;
pub mod encoder;
pub mod evaluation;
pub mod error;
pub mod nn;
pub mod streams;

pub use error::{Error, Result};
