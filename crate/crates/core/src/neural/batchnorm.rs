use super::{NeuralError, Tensor2};

pub const DEFAULT_BN_EPS: f64 = 1e-3;
pub const DEFAULT_BN_MOMENTUM: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnMode {
    /// Normalize with batch statistics and update the running averages.
    Train,
    /// Normalize with the running averages.
    Infer,
}

/// Per-channel batch normalization state.
///
/// `gamma` and `beta` are optimized; the running statistics are not, but
/// they are counted (and serialized) alongside them.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
}

/// Values saved by a training-mode forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    x_hat: Vec<Tensor2>,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            eps: DEFAULT_BN_EPS,
            momentum: DEFAULT_BN_MOMENTUM,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    fn check_batch(&self, batch: &[Tensor2]) -> Result<(usize, usize), NeuralError> {
        let first = batch.first().ok_or(NeuralError::EmptyBatch)?;
        if first.channels() != self.channels() {
            return Err(NeuralError::ChannelMismatch {
                expected: self.channels(),
                got: first.channels(),
            });
        }
        for x in batch {
            if x.shape() != first.shape() {
                return Err(NeuralError::ShapeMismatch {
                    expected: first.shape(),
                    got: x.shape(),
                });
            }
        }
        Ok(first.shape())
    }

    /// Per-channel mean and (biased) variance over batch and timesteps.
    /// Summation runs sample by sample, timestep by timestep.
    fn batch_stats(batch: &[Tensor2], channels: usize) -> (Vec<f64>, Vec<f64>) {
        let n = (batch.len() * batch[0].length()) as f64;
        let mut mean = vec![0.0; channels];
        for x in batch {
            for row in x.data().chunks_exact(channels) {
                for (m, &v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; channels];
        for x in batch {
            for row in x.data().chunks_exact(channels) {
                for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
        }
        var.iter_mut().for_each(|s| *s /= n);
        (mean, var)
    }

    fn normalize(
        &self,
        batch: &[Tensor2],
        mean: &[f64],
        inv_std: &[f64],
    ) -> (Vec<Tensor2>, Vec<Tensor2>) {
        let ch = self.channels();
        let mut outs = Vec::with_capacity(batch.len());
        let mut hats = Vec::with_capacity(batch.len());
        for x in batch {
            let mut hat = x.clone();
            let mut out = x.clone();
            for (hrow, orow) in hat
                .data_mut()
                .chunks_exact_mut(ch)
                .zip(out.data_mut().chunks_exact_mut(ch))
            {
                for c in 0..ch {
                    let h = (hrow[c] - mean[c]) * inv_std[c];
                    hrow[c] = h;
                    orow[c] = self.gamma[c] * h + self.beta[c];
                }
            }
            outs.push(out);
            hats.push(hat);
        }
        (outs, hats)
    }

    /// Training-mode forward: `gamma * (x - mean) / sqrt(var + eps) + beta`
    /// with batch statistics; running statistics move toward them by
    /// `1 - momentum`.
    pub fn forward_train(
        &mut self,
        batch: &[Tensor2],
    ) -> Result<(Vec<Tensor2>, BnCache), NeuralError> {
        let (outs, cache) = self.forward_batch(batch)?;
        self.update_running(&cache);
        Ok((outs, cache))
    }

    /// Training-mode normalization without touching the running statistics.
    pub fn forward_batch(&self, batch: &[Tensor2]) -> Result<(Vec<Tensor2>, BnCache), NeuralError> {
        let (_, ch) = self.check_batch(batch)?;
        let (mean, var) = Self::batch_stats(batch, ch);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect();
        let (outs, x_hat) = self.normalize(batch, &mean, &inv_std);
        Ok((
            outs,
            BnCache {
                x_hat,
                inv_std,
                mean,
                var,
            },
        ))
    }

    /// Fold the batch statistics recorded in `cache` into the running
    /// averages.
    pub fn update_running(&mut self, cache: &BnCache) {
        for c in 0..self.channels() {
            self.running_mean[c] =
                self.momentum * self.running_mean[c] + (1.0 - self.momentum) * cache.mean[c];
            self.running_var[c] =
                self.momentum * self.running_var[c] + (1.0 - self.momentum) * cache.var[c];
        }
    }

    /// Inference-mode forward using the running statistics. Each sample is
    /// normalized independently of the rest of the batch.
    pub fn forward_infer(&self, batch: &[Tensor2]) -> Result<Vec<Tensor2>, NeuralError> {
        self.check_batch(batch)?;
        let inv_std: Vec<f64> = self
            .running_var
            .iter()
            .map(|v| 1.0 / (v + self.eps).sqrt())
            .collect();
        Ok(self.normalize(batch, &self.running_mean, &inv_std).0)
    }

    pub fn forward(
        &mut self,
        batch: &[Tensor2],
        mode: BnMode,
    ) -> Result<(Vec<Tensor2>, Option<BnCache>), NeuralError> {
        match mode {
            BnMode::Train => self.forward_train(batch).map(|(o, c)| (o, Some(c))),
            BnMode::Infer => self.forward_infer(batch).map(|o| (o, None)),
        }
    }

    /// Returns `(grad_x, grad_gamma, grad_beta)` for a training-mode pass.
    pub fn backward(
        &self,
        cache: &BnCache,
        upstream: &[Tensor2],
    ) -> Result<(Vec<Tensor2>, Vec<f64>, Vec<f64>), NeuralError> {
        let ch = self.channels();
        if upstream.len() != cache.x_hat.len() {
            return Err(NeuralError::BatchMismatch {
                expected: cache.x_hat.len(),
                got: upstream.len(),
            });
        }
        for (u, h) in upstream.iter().zip(&cache.x_hat) {
            if u.shape() != h.shape() {
                return Err(NeuralError::ShapeMismatch {
                    expected: h.shape(),
                    got: u.shape(),
                });
            }
        }
        let n = (upstream.len() * upstream[0].length()) as f64;
        let mut grad_beta = vec![0.0; ch];
        let mut grad_gamma = vec![0.0; ch];
        for (u, h) in upstream.iter().zip(&cache.x_hat) {
            for (urow, hrow) in u.data().chunks_exact(ch).zip(h.data().chunks_exact(ch)) {
                for c in 0..ch {
                    grad_beta[c] += urow[c];
                    grad_gamma[c] += urow[c] * hrow[c];
                }
            }
        }
        // dx = gamma * inv_std / N * (N * dy - sum(dy) - x_hat * sum(dy * x_hat))
        let mut grads = Vec::with_capacity(upstream.len());
        for (u, h) in upstream.iter().zip(&cache.x_hat) {
            let mut g = u.clone();
            for (grow, hrow) in g.data_mut().chunks_exact_mut(ch).zip(h.data().chunks_exact(ch)) {
                for c in 0..ch {
                    let scale = self.gamma[c] * cache.inv_std[c] / n;
                    grow[c] = scale * (n * grow[c] - grad_beta[c] - hrow[c] * grad_gamma[c]);
                }
            }
            grads.push(g);
        }
        Ok((grads, grad_gamma, grad_beta))
    }
}
