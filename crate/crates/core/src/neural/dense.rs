use super::{NeuralError, Tensor2};

/// Bias-free per-timestep linear map, laid out `[in_channel][out_channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseWeights {
    pub in_channels: usize,
    pub out_channels: usize,
    pub data: Vec<f64>,
}

impl DenseWeights {
    pub fn zeros(in_channels: usize, out_channels: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            data: vec![0.0; in_channels * out_channels],
        }
    }

    pub fn from_vec(in_channels: usize, out_channels: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), in_channels * out_channels);
        Self {
            in_channels,
            out_channels,
            data,
        }
    }
}

/// `out[t, o] = sum_c x[t, c] * w[c, o]`
pub fn dense_forward(x: &Tensor2, w: &DenseWeights) -> Result<Tensor2, NeuralError> {
    if x.channels() != w.in_channels {
        return Err(NeuralError::ChannelMismatch {
            expected: w.in_channels,
            got: x.channels(),
        });
    }
    let cout = w.out_channels;
    let mut out = Tensor2::zeros(x.length(), cout);
    for (t, orow) in out.data_mut().chunks_exact_mut(cout).enumerate() {
        for (c, &xv) in x.row(t).iter().enumerate() {
            for (o, &wv) in orow.iter_mut().zip(&w.data[c * cout..(c + 1) * cout]) {
                *o += xv * wv;
            }
        }
    }
    Ok(out)
}

/// Returns `(grad_x, grad_w)`.
pub fn dense_backward(
    x: &Tensor2,
    w: &DenseWeights,
    upstream: &Tensor2,
) -> Result<(Tensor2, DenseWeights), NeuralError> {
    if x.channels() != w.in_channels {
        return Err(NeuralError::ChannelMismatch {
            expected: w.in_channels,
            got: x.channels(),
        });
    }
    if upstream.shape() != (x.length(), w.out_channels) {
        return Err(NeuralError::ShapeMismatch {
            expected: (x.length(), w.out_channels),
            got: upstream.shape(),
        });
    }
    let (cin, cout) = (w.in_channels, w.out_channels);
    let mut grad_x = Tensor2::zeros(x.length(), cin);
    let mut grad_w = DenseWeights::zeros(cin, cout);
    for (t, gx) in grad_x.data_mut().chunks_exact_mut(cin).enumerate() {
        let urow = upstream.row(t);
        let xrow = x.row(t);
        for c in 0..cin {
            let wrow = &w.data[c * cout..(c + 1) * cout];
            let grow = &mut grad_w.data[c * cout..(c + 1) * cout];
            let mut acc = 0.0;
            for o in 0..cout {
                acc += urow[o] * wrow[o];
                grow[o] += xrow[c] * urow[o];
            }
            gx[c] = acc;
        }
    }
    Ok((grad_x, grad_w))
}
