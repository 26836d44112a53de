use super::{NeuralError, Tensor2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn activation_forward(x: &Tensor2, kind: Activation) -> Tensor2 {
    match kind {
        Activation::Relu => x.map(|v| v.max(0.0)),
        Activation::Sigmoid => x.map(sigmoid),
    }
}

/// Gate `upstream` by the activation derivative, expressed through the
/// forward output `y`.
pub fn activation_backward(
    y: &Tensor2,
    upstream: &Tensor2,
    kind: Activation,
) -> Result<Tensor2, NeuralError> {
    if y.shape() != upstream.shape() {
        return Err(NeuralError::ShapeMismatch {
            expected: y.shape(),
            got: upstream.shape(),
        });
    }
    let mut g = upstream.clone();
    for (gv, &yv) in g.data_mut().iter_mut().zip(y.data()) {
        *gv *= match kind {
            Activation::Relu => {
                if yv > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => yv * (1.0 - yv),
        };
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let y = activation_forward(&Tensor2::from_column(&[-2.0, 3.0]), Activation::Relu);
        assert_eq!(y.data(), &[0.0, 3.0]);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn sigmoid_derivative_at_zero() {
        let y = activation_forward(&Tensor2::from_column(&[0.0]), Activation::Sigmoid);
        let g = activation_backward(&y, &Tensor2::from_column(&[1.0]), Activation::Sigmoid).unwrap();
        assert_eq!(g.data()[0], 0.25);
        let h = 1e-5;
        let fd = (sigmoid(h) - sigmoid(-h)) / (2.0 * h);
        assert!((fd - 0.25).abs() < 1e-8);
    }
}
