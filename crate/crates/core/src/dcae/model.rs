use super::DcaeError;
use crate::neural::{
    activation_backward, activation_forward, conv1d_backward, conv1d_forward, count_parameters,
    dense_backward, dense_forward, maxpool1d_backward, maxpool1d_forward, upsample1d_backward,
    upsample1d_forward, Activation, BatchNorm, BnCache, ConvKernel, DenseWeights, LayerKind,
    LayerSpec, Tensor2,
};
use crate::preprocess::SIGNAL_LEN;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of layers in the encoder half (three conv / batch-norm / pool
/// blocks); the remaining ten form the decoder.
pub const ENCODER_LAYERS: usize = 9;
pub const DCAE_LAYERS: usize = 19;
/// Channel widths of the six convolutions, in order.
pub const TABLE_WIDTHS: [usize; 6] = [32, 16, 16, 16, 16, 32];

/// Geometry of the autoencoder. The layer sequence is fixed; only the
/// input length and convolution widths vary (reduced variants exist for
/// gradient checking).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input_length: usize,
    pub widths: [usize; 6],
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            input_length: SIGNAL_LEN,
            widths: TABLE_WIDTHS,
        }
    }
}

impl Architecture {
    /// The 19 layer specifications, encoder first.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let w = self.widths;
        let relu = Activation::Relu;
        vec![
            LayerSpec::conv1d("Conv1D_1", 1, w[0], 3, relu),
            LayerSpec::batchnorm("BN_1", w[0]),
            LayerSpec::maxpool("MP1D_1", w[0], 2),
            LayerSpec::conv1d("Conv1D_2", w[0], w[1], 3, relu),
            LayerSpec::batchnorm("BN_2", w[1]),
            LayerSpec::maxpool("MP1D_2", w[1], 2),
            LayerSpec::conv1d("Conv1D_3", w[1], w[2], 3, relu),
            LayerSpec::batchnorm("BN_3", w[2]),
            LayerSpec::maxpool("MP1D_3", w[2], 2),
            LayerSpec::conv1d("Conv1D_4", w[2], w[3], 3, relu),
            LayerSpec::batchnorm("BN_4", w[3]),
            LayerSpec::upsample("up-sampling_1", w[3], 2),
            LayerSpec::conv1d("Conv1D_5", w[3], w[4], 3, relu),
            LayerSpec::batchnorm("BN_5", w[4]),
            LayerSpec::upsample("up-sampling_2", w[4], 2),
            LayerSpec::conv1d("Conv1D_6", w[4], w[5], 3, relu),
            LayerSpec::batchnorm("BN_6", w[5]),
            LayerSpec::upsample("up-sampling_3", w[5], 2),
            LayerSpec::dense("Dense", w[5], 1, Activation::Sigmoid),
        ]
    }

    fn validate(&self) -> Result<(), DcaeError> {
        if self.input_length == 0 || self.input_length % 8 != 0 {
            return Err(DcaeError::BadArchitecture(format!(
                "input length {} must be a positive multiple of 8",
                self.input_length
            )));
        }
        if self.widths.contains(&0) {
            return Err(DcaeError::BadArchitecture("zero channel width".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Conv(ConvKernel),
    BatchNorm(BatchNorm),
    Dense(DenseWeights),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad {
    Conv(Vec<f64>),
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
    Dense(Vec<f64>),
    None,
}

/// Per-layer gradients of the batch loss, aligned with
/// [`DcaeModel::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    /// Flattened in the same order as [`DcaeModel::trainable_slices_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.layers {
            match g {
                LayerGrad::Conv(v) | LayerGrad::Dense(v) => out.push(v.as_slice()),
                LayerGrad::BatchNorm { gamma, beta } => {
                    out.push(gamma.as_slice());
                    out.push(beta.as_slice());
                }
                LayerGrad::None => {}
            }
        }
        out
    }
}

/// The autoencoder: layer table, parameters, and Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct DcaeModel {
    pub architecture: Architecture,
    pub layers: Vec<LayerSpec>,
    pub params: Vec<LayerParams>,
    pub rng_seed: u64,
    pub optimizer: super::AdamState,
}

enum LayerTrace {
    Bn(BnCache),
    Pool(Vec<Vec<usize>>),
    Plain,
}

/// Activations recorded by a training-mode forward pass.
pub struct ForwardTrace {
    /// `activations[i]` is the output of layer `i` (1-based); index 0 holds
    /// the input batch.
    activations: Vec<Vec<Tensor2>>,
    traces: Vec<LayerTrace>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[Tensor2] {
        self.activations.last().expect("trace has an input row")
    }
}

/// Table-conformant model with Glorot-uniform weights drawn from `seed`.
pub fn build_dcae(seed: u64) -> DcaeModel {
    DcaeModel::new(Architecture::default(), seed).expect("default architecture is valid")
}

impl DcaeModel {
    pub fn new(architecture: Architecture, seed: u64) -> Result<Self, DcaeError> {
        architecture.validate()?;
        let layers = architecture.layers();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |fan_in: usize, fan_out: usize, n: usize| -> Vec<f64> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        };
        let params = layers
            .iter()
            .map(|spec| match spec.kind {
                LayerKind::Conv1d => {
                    let (k, i, o) = (spec.kernel_size, spec.in_channels, spec.out_channels);
                    LayerParams::Conv(ConvKernel::from_vec(k, i, o, glorot(k * i, k * o, k * i * o)))
                }
                LayerKind::BatchNorm => LayerParams::BatchNorm(BatchNorm::new(spec.out_channels)),
                LayerKind::Dense => {
                    let (i, o) = (spec.in_channels, spec.out_channels);
                    LayerParams::Dense(DenseWeights::from_vec(i, o, glorot(i, o, i * o)))
                }
                _ => LayerParams::None,
            })
            .collect();
        Ok(Self {
            architecture,
            layers,
            params,
            rng_seed: seed,
            optimizer: super::AdamState::default(),
        })
    }

    pub fn input_length(&self) -> usize {
        self.architecture.input_length
    }

    /// `(timesteps, channels)` after each row: the input row followed by
    /// one entry per layer.
    pub fn output_shapes(&self) -> Vec<(usize, usize)> {
        let mut len = self.input_length();
        let mut shapes = vec![(len, 1)];
        for spec in &self.layers {
            len = spec.output_length(len);
            shapes.push((len, spec.out_channels));
        }
        shapes
    }

    pub fn parameter_counts(&self) -> Vec<usize> {
        self.layers.iter().map(count_parameters).collect()
    }

    pub fn total_parameters(&self) -> usize {
        self.parameter_counts().iter().sum()
    }

    /// Bottleneck shape, `(timesteps, channels)` after the encoder.
    pub fn bottleneck_shape(&self) -> (usize, usize) {
        self.output_shapes()[ENCODER_LAYERS]
    }

    /// Mutable views of every optimizer-updated tensor: convolution and
    /// dense weights, and batch-norm gamma then beta.
    pub fn trainable_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for p in &mut self.params {
            match p {
                LayerParams::Conv(k) => out.push(&mut k.data),
                LayerParams::Dense(w) => out.push(&mut w.data),
                LayerParams::BatchNorm(bn) => {
                    out.push(&mut bn.gamma);
                    out.push(&mut bn.beta);
                }
                LayerParams::None => {}
            }
        }
        out
    }

    fn check_inputs(&self, batch: &[Tensor2]) -> Result<(), DcaeError> {
        if batch.is_empty() {
            return Err(DcaeError::EmptyBatch);
        }
        for x in batch {
            if x.shape() != (self.input_length(), 1) {
                return Err(DcaeError::ShapeMismatch {
                    expected: (self.input_length(), 1),
                    got: x.shape(),
                });
            }
        }
        Ok(())
    }

    /// Apply layers `range` to a batch in inference mode.
    fn run_infer(
        &self,
        mut batch: Vec<Tensor2>,
        range: std::ops::Range<usize>,
    ) -> Result<Vec<Tensor2>, DcaeError> {
        for i in range {
            let spec = &self.layers[i];
            batch = match (&self.params[i], spec.kind) {
                (LayerParams::BatchNorm(bn), _) => bn.forward_infer(&batch)?,
                _ => batch
                    .iter()
                    .map(|x| self.apply_stateless(i, x).map(|(y, _)| y))
                    .collect::<Result<_, _>>()?,
            };
        }
        Ok(batch)
    }

    /// Per-sample layers (everything except batch norm). Returns the output
    /// and, for pooling, the argmax record.
    fn apply_stateless(&self, i: usize, x: &Tensor2) -> Result<(Tensor2, Vec<usize>), DcaeError> {
        let spec = &self.layers[i];
        Ok(match (&self.params[i], spec.kind) {
            (LayerParams::Conv(k), _) => {
                let y = conv1d_forward(x, k)?;
                (apply_activation(y, spec.activation), vec![])
            }
            (LayerParams::Dense(w), _) => {
                let y = dense_forward(x, w)?;
                (apply_activation(y, spec.activation), vec![])
            }
            (_, LayerKind::MaxPool) => maxpool1d_forward(x, spec.factor),
            (_, LayerKind::Upsample) => (upsample1d_forward(x, spec.factor), vec![]),
            (_, LayerKind::Relu) => (activation_forward(x, Activation::Relu), vec![]),
            (_, LayerKind::Sigmoid) => (activation_forward(x, Activation::Sigmoid), vec![]),
            (p, kind) => unreachable!("layer {i}: {kind:?} with params {p:?}"),
        })
    }

    /// Inference-mode reconstruction. Each record is processed
    /// independently, so results do not depend on batch composition.
    pub fn reconstruct(&self, batch: &[Tensor2]) -> Result<Vec<Tensor2>, DcaeError> {
        self.check_inputs(batch)?;
        self.run_infer(batch.to_vec(), 0..self.layers.len())
    }

    /// Inference-mode encoder output (the bottleneck) for one record.
    pub fn encode(&self, x: &Tensor2) -> Result<Tensor2, DcaeError> {
        self.check_inputs(std::slice::from_ref(x))?;
        Ok(self
            .run_infer(vec![x.clone()], 0..ENCODER_LAYERS)?
            .pop()
            .expect("one record in, one out"))
    }

    /// Training-mode forward pass using batch statistics. Running
    /// statistics are left untouched; see [`DcaeModel::commit_running_stats`].
    pub fn forward_train(&self, batch: &[Tensor2]) -> Result<ForwardTrace, DcaeError> {
        self.check_inputs(batch)?;
        let mut activations = vec![batch.to_vec()];
        let mut traces = Vec::with_capacity(self.layers.len());
        for i in 0..self.layers.len() {
            let input = activations.last().expect("input row");
            let (out, trace) = match &self.params[i] {
                LayerParams::BatchNorm(bn) => {
                    let (out, cache) = bn.forward_batch(input)?;
                    (out, LayerTrace::Bn(cache))
                }
                _ => {
                    let mut outs = Vec::with_capacity(input.len());
                    let mut argmaxes = Vec::new();
                    for x in input {
                        let (y, arg) = self.apply_stateless(i, x)?;
                        outs.push(y);
                        if self.layers[i].kind == LayerKind::MaxPool {
                            argmaxes.push(arg);
                        }
                    }
                    let trace = if self.layers[i].kind == LayerKind::MaxPool {
                        LayerTrace::Pool(argmaxes)
                    } else {
                        LayerTrace::Plain
                    };
                    (outs, trace)
                }
            };
            activations.push(out);
            traces.push(trace);
        }
        Ok(ForwardTrace {
            activations,
            traces,
        })
    }

    /// Fold the batch statistics of a training pass into the running
    /// averages of every batch-norm layer.
    pub fn commit_running_stats(&mut self, trace: &ForwardTrace) {
        for (p, t) in self.params.iter_mut().zip(&trace.traces) {
            if let (LayerParams::BatchNorm(bn), LayerTrace::Bn(cache)) = (p, t) {
                bn.update_running(cache);
            }
        }
    }

    /// Back-propagate `upstream` (gradient of the loss with respect to the
    /// network output) through a recorded training pass.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        upstream: Vec<Tensor2>,
    ) -> Result<Gradients, DcaeError> {
        let mut grad = upstream;
        let mut layer_grads = vec![LayerGrad::None; self.layers.len()];
        for i in (0..self.layers.len()).rev() {
            let spec = &self.layers[i];
            let input = &trace.activations[i];
            let output = &trace.activations[i + 1];
            match (&self.params[i], &trace.traces[i]) {
                (LayerParams::Conv(k), _) => {
                    let mut gk = vec![0.0; k.data.len()];
                    let mut next = Vec::with_capacity(grad.len());
                    for ((x, y), g) in input.iter().zip(output).zip(&grad) {
                        let g = gate(y, g, spec.activation)?;
                        let (gx, gks) = conv1d_backward(x, k, &g)?;
                        gk.iter_mut().zip(&gks.data).for_each(|(a, b)| *a += b);
                        next.push(gx);
                    }
                    layer_grads[i] = LayerGrad::Conv(gk);
                    grad = next;
                }
                (LayerParams::Dense(w), _) => {
                    let mut gw = vec![0.0; w.data.len()];
                    let mut next = Vec::with_capacity(grad.len());
                    for ((x, y), g) in input.iter().zip(output).zip(&grad) {
                        let g = gate(y, g, spec.activation)?;
                        let (gx, gws) = dense_backward(x, w, &g)?;
                        gw.iter_mut().zip(&gws.data).for_each(|(a, b)| *a += b);
                        next.push(gx);
                    }
                    layer_grads[i] = LayerGrad::Dense(gw);
                    grad = next;
                }
                (LayerParams::BatchNorm(bn), LayerTrace::Bn(cache)) => {
                    let (gx, gamma, beta) = bn.backward(cache, &grad)?;
                    layer_grads[i] = LayerGrad::BatchNorm { gamma, beta };
                    grad = gx;
                }
                (_, LayerTrace::Pool(argmaxes)) => {
                    grad = argmaxes
                        .iter()
                        .zip(&grad)
                        .map(|(arg, g)| maxpool1d_backward(arg, g, input[0].length()))
                        .collect::<Result<_, _>>()?;
                }
                _ => {
                    grad = match spec.kind {
                        LayerKind::Upsample => grad
                            .iter()
                            .map(|g| upsample1d_backward(g, spec.factor))
                            .collect::<Result<_, _>>()?,
                        LayerKind::Relu => gate_all(output, &grad, Activation::Relu)?,
                        LayerKind::Sigmoid => gate_all(output, &grad, Activation::Sigmoid)?,
                        kind => unreachable!("layer {i}: unexpected {kind:?}"),
                    };
                }
            }
        }
        Ok(Gradients {
            layers: layer_grads,
        })
    }
}

fn apply_activation(y: Tensor2, act: Option<Activation>) -> Tensor2 {
    match act {
        Some(a) => activation_forward(&y, a),
        None => y,
    }
}

fn gate(y: &Tensor2, g: &Tensor2, act: Option<Activation>) -> Result<Tensor2, DcaeError> {
    Ok(match act {
        Some(a) => activation_backward(y, g, a)?,
        None => g.clone(),
    })
}

fn gate_all(ys: &[Tensor2], gs: &[Tensor2], act: Activation) -> Result<Vec<Tensor2>, DcaeError> {
    ys.iter()
        .zip(gs)
        .map(|(y, g)| Ok(activation_backward(y, g, act)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes_and_counts() {
        let m = build_dcae(1);
        assert_eq!(m.layers.len(), DCAE_LAYERS);
        let shapes = m.output_shapes();
        assert_eq!(shapes.len(), 20);
        assert_eq!(shapes[9], (1125, 16));
        assert_eq!(shapes[19], (9000, 1));
        assert_eq!(m.total_parameters(), 6016);
    }

    #[test]
    fn seeded_build_is_reproducible() {
        assert_eq!(build_dcae(5), build_dcae(5));
        assert_ne!(build_dcae(5).params, build_dcae(6).params);
    }

    #[test]
    fn rejects_lengths_not_divisible_by_eight() {
        let arch = Architecture {
            input_length: 60,
            widths: [2; 6],
        };
        assert!(matches!(
            DcaeModel::new(arch, 0),
            Err(DcaeError::BadArchitecture(_))
        ));
    }
}
