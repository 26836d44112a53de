//! Atrial-fibrillation detection from raw single-lead ECG.
//!
//! Records are min-max normalized to fixed 9000-sample signals, compressed
//! by a 19-layer convolutional autoencoder, and the bottleneck features are
//! classified with boosting ensembles (AdaBoost over stumps, and a
//! histogram gradient-boosted tree ensemble grown level-wise or
//! leaf-wise).

pub mod boosting;
pub mod cli;
pub mod dcae;
pub mod metrics;
pub mod neural;
pub mod preprocess;
pub mod signal_io;
pub mod synthetic;
