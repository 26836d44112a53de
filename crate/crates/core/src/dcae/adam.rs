//! Bias-corrected Adam.
//!
//! For step `t` (1-based) and gradient `g`:
//!
//! ```text
//! m = beta1 * m + (1 - beta1) * g
//! v = beta2 * v + (1 - beta2) * g^2
//! p -= lr * (m / (1 - beta1^t)) / (sqrt(v / (1 - beta2^t)) + eps)
//! ```

use super::DcaeError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 32,
            epochs: 30,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), DcaeError> {
        let bad = |what: &str| Err(DcaeError::BadConfig(what.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }
}

/// Moment estimates, one vector per trainable tensor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

/// One Adam update over a list of parameter tensors. Moments are created
/// (as zeros) on the first call.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    config: &OptimizerConfig,
) -> Result<(), DcaeError> {
    if params.len() != grads.len() {
        return Err(DcaeError::ParameterMismatch(format!(
            "{} parameter tensors, {} gradients",
            params.len(),
            grads.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() {
            return Err(DcaeError::ParameterMismatch(format!(
                "tensor {i}: {} parameters, {} gradients",
                p.len(),
                g.len()
            )));
        }
    }
    if state.first_moment.is_empty() && state.step == 0 {
        state.first_moment = params.iter().map(|p| vec![0.0; p.len()]).collect();
        state.second_moment = state.first_moment.clone();
    }
    let moments_fit = |ms: &[Vec<f64>]| {
        ms.len() == params.len() && ms.iter().zip(params.iter()).all(|(m, p)| m.len() == p.len())
    };
    if !moments_fit(&state.first_moment) || !moments_fit(&state.second_moment) {
        return Err(DcaeError::ParameterMismatch(
            "optimizer moments do not match the parameter tensors".into(),
        ));
    }

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        for j in 0..p.len() {
            m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
            v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.5, -1.5];
        let mut st = AdamState::default();
        let cfg = OptimizerConfig::default();
        adam_step(&mut [&mut p], &[&[0.0, 0.0]], &mut st, &cfg).unwrap();
        assert_eq!(p, vec![0.5, -1.5]);
        assert_eq!(st.first_moment, vec![vec![0.0, 0.0]]);
        assert_eq!(st.second_moment, vec![vec![0.0, 0.0]]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        let mut p = vec![1.0];
        let mut st = AdamState::default();
        let cfg = OptimizerConfig::default();
        adam_step(&mut [&mut p], &[&[1.0]], &mut st, &cfg).unwrap();
        let expected = 0.001 / (1.0 + 1e-8);
        assert!(((1.0 - p[0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_steps() {
        let mut p = vec![0.0];
        let mut st = AdamState::default();
        let cfg = OptimizerConfig::default();
        let mut prev = p[0];
        for _ in 0..2 {
            adam_step(&mut [&mut p], &[&[1.0]], &mut st, &cfg).unwrap();
            assert!(((prev - p[0]) - 0.001).abs() < 1e-9);
            prev = p[0];
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = vec![0.0; 3];
        let mut st = AdamState::default();
        let cfg = OptimizerConfig::default();
        assert!(matches!(
            adam_step(&mut [&mut p], &[&[1.0, 2.0]], &mut st, &cfg),
            Err(DcaeError::ParameterMismatch(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            beta1: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            learning_rate: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
