use super::{adam_step, DcaeError, DcaeModel, OptimizerConfig};
use crate::neural::Tensor2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean squared reconstruction error, `(1/T) * sum (u - u_hat)^2`.
pub fn mse(u: &[f64], u_hat: &[f64]) -> Result<f64, DcaeError> {
    if u.len() != u_hat.len() {
        return Err(DcaeError::LengthMismatch {
            left: u.len(),
            right: u_hat.len(),
        });
    }
    if u.is_empty() {
        return Err(DcaeError::LengthMismatch { left: 0, right: 0 });
    }
    let sum: f64 = u.iter().zip(u_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / u.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub mean_mse: f64,
}

impl DcaeModel {
    /// Mean per-record MSE of a training-mode pass over `batch`, with its
    /// gradients. Model state is not modified.
    pub fn loss_and_gradients(
        &self,
        batch: &[Tensor2],
    ) -> Result<(f64, super::Gradients, super::ForwardTrace), DcaeError> {
        let trace = self.forward_train(batch)?;
        let scale = 2.0 / (batch.len() * self.input_length()) as f64;
        let mut loss = 0.0;
        let mut upstream = Vec::with_capacity(batch.len());
        for (x, y) in batch.iter().zip(trace.output()) {
            loss += mse(x.data(), y.data())?;
            upstream.push(Tensor2::from_vec(
                y.data()
                    .iter()
                    .zip(x.data())
                    .map(|(yv, xv)| scale * (yv - xv))
                    .collect(),
                y.length(),
                1,
            ));
        }
        loss /= batch.len() as f64;
        let grads = self.backward(&trace, upstream)?;
        Ok((loss, grads, trace))
    }

    /// Train-mode batch loss without gradients.
    pub fn batch_loss(&self, batch: &[Tensor2]) -> Result<f64, DcaeError> {
        let trace = self.forward_train(batch)?;
        let mut loss = 0.0;
        for (x, y) in batch.iter().zip(trace.output()) {
            loss += mse(x.data(), y.data())?;
        }
        Ok(loss / batch.len() as f64)
    }

    /// Inference-mode mean reconstruction error over `signals`.
    pub fn reconstruction_error(&self, signals: &[Vec<f64>]) -> Result<f64, DcaeError> {
        if signals.is_empty() {
            return Err(DcaeError::EmptyBatch);
        }
        let mut total = 0.0;
        for s in signals {
            let x = Tensor2::from_column(s);
            let y = self.reconstruct(std::slice::from_ref(&x))?;
            total += mse(s, y[0].data())?;
        }
        Ok(total / signals.len() as f64)
    }
}

/// Minibatch Adam on the reconstruction MSE.
///
/// Each epoch visits the signals in an order drawn from a ChaCha stream
/// seeded with `seed`; the returned log holds the mean training loss of
/// each epoch.
pub fn train_dcae(
    model: &mut DcaeModel,
    signals: &[Vec<f64>],
    config: &OptimizerConfig,
    seed: u64,
) -> Result<Vec<EpochLoss>, DcaeError> {
    config.validate()?;
    if signals.is_empty() {
        return Err(DcaeError::EmptyTrainingSet);
    }
    for s in signals {
        if s.len() != model.input_length() {
            return Err(DcaeError::ShapeMismatch {
                expected: (model.input_length(), 1),
                got: (s.len(), 1),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..signals.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<Tensor2> = chunk
                .iter()
                .map(|&i| Tensor2::from_column(&signals[i]))
                .collect();
            let (loss, grads, trace) = model.loss_and_gradients(&batch)?;
            if !loss.is_finite() {
                return Err(DcaeError::NonFiniteLoss { epoch, batch: b });
            }
            model.commit_running_stats(&trace);
            drop(trace);
            let grads = grads.tensors();
            let mut state = std::mem::take(&mut model.optimizer);
            let result = adam_step(&mut model.trainable_slices_mut(), &grads, &mut state, config);
            model.optimizer = state;
            result?;
            weighted += loss * chunk.len() as f64;
        }
        let mean_mse = weighted / signals.len() as f64;
        log::debug!("epoch {epoch}: mean mse {mean_mse:.6}");
        log.push(EpochLoss { epoch, mean_mse });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(mse(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            mse(&[1.0], &[1.0, 2.0]),
            Err(DcaeError::LengthMismatch { left: 1, right: 2 })
        ));
    }
}
