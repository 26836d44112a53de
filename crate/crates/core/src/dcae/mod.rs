//! The 19-layer convolutional autoencoder: construction, training with
//! Adam on reconstruction MSE, bottleneck feature extraction, and model
//! files.

mod adam;
mod features;
mod io;
mod model;
mod train;

pub use adam::{adam_step, AdamState, OptimizerConfig};
pub use features::{encode_features, FeatureMode, FeatureVector};
pub use io::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::{
    build_dcae, Architecture, DcaeModel, ForwardTrace, Gradients, LayerGrad, LayerParams,
    DCAE_LAYERS, ENCODER_LAYERS, TABLE_WIDTHS,
};
pub use train::{mse, train_dcae, EpochLoss};

use crate::neural::NeuralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcaeError {
    #[error("expected input shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parameter/gradient mismatch: {0}")]
    ParameterMismatch(String),
    #[error("bad architecture: {0}")]
    BadArchitecture(String),
    #[error("bad optimizer config: {0}")]
    BadConfig(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("no training signals")]
    EmptyTrainingSet,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("model file version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Kernel(#[from] NeuralError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
