//! One-dimensional layer kernels with hand-written backward passes.
//!
//! Every kernel operates on [`Tensor2`] (timesteps x channels, row-major by
//! timestep). Reductions run in a fixed order so results are reproducible
//! run to run.

mod activation;
mod batchnorm;
mod conv;
mod dense;
mod layer;
mod pool;
mod tensor;

pub use activation::{activation_backward, activation_forward, sigmoid, Activation};
pub use batchnorm::{BatchNorm, BnCache, BnMode, DEFAULT_BN_EPS, DEFAULT_BN_MOMENTUM};
pub use conv::{conv1d_backward, conv1d_forward, ConvKernel};
pub use dense::{dense_backward, dense_forward, DenseWeights};
pub use layer::{count_parameters, LayerKind, LayerSpec};
pub use pool::{maxpool1d_backward, maxpool1d_forward, upsample1d_backward, upsample1d_forward};
pub use tensor::Tensor2;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("expected {expected} input channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("expected a batch of {expected}, got {got}")]
    BatchMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("index {index} out of range for length {length}")]
    IndexOutOfRange { index: usize, length: usize },
}
