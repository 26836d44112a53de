use super::{NeuralError, Tensor2};

/// Bias-free 1-D convolution kernel, laid out `[tap][in_channel][out_channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    pub taps: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub data: Vec<f64>,
}

impl ConvKernel {
    pub fn zeros(taps: usize, in_channels: usize, out_channels: usize) -> Self {
        assert!(taps % 2 == 1, "kernel length must be odd for same padding");
        Self {
            taps,
            in_channels,
            out_channels,
            data: vec![0.0; taps * in_channels * out_channels],
        }
    }

    pub fn from_vec(taps: usize, in_channels: usize, out_channels: usize, data: Vec<f64>) -> Self {
        assert!(taps % 2 == 1, "kernel length must be odd for same padding");
        assert_eq!(data.len(), taps * in_channels * out_channels);
        Self {
            taps,
            in_channels,
            out_channels,
            data,
        }
    }

    fn index(&self, tap: usize, c: usize) -> usize {
        (tap * self.in_channels + c) * self.out_channels
    }
}

/// Same-padded, stride-1 cross-correlation:
/// `out[t, o] = sum_{j, c} x[t + j - k/2, c] * kernel[j, c, o]`, with
/// out-of-range inputs read as zero.
pub fn conv1d_forward(x: &Tensor2, kernel: &ConvKernel) -> Result<Tensor2, NeuralError> {
    if x.channels() != kernel.in_channels {
        return Err(NeuralError::ChannelMismatch {
            expected: kernel.in_channels,
            got: x.channels(),
        });
    }
    let len = x.length();
    let (cin, cout) = (kernel.in_channels, kernel.out_channels);
    let half = kernel.taps / 2;
    let mut out = Tensor2::zeros(len, cout);
    let xd = x.data();
    let od = out.data_mut();
    for t in 0..len {
        let orow = &mut od[t * cout..(t + 1) * cout];
        for j in 0..kernel.taps {
            let Some(src) = (t + j).checked_sub(half).filter(|&s| s < len) else {
                continue;
            };
            let xrow = &xd[src * cin..(src + 1) * cin];
            for (c, &xv) in xrow.iter().enumerate() {
                let k0 = kernel.index(j, c);
                let krow = &kernel.data[k0..k0 + cout];
                for (o, &kv) in orow.iter_mut().zip(krow) {
                    *o += xv * kv;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv1d_forward`] with respect to its input and kernel.
pub fn conv1d_backward(
    x: &Tensor2,
    kernel: &ConvKernel,
    upstream: &Tensor2,
) -> Result<(Tensor2, ConvKernel), NeuralError> {
    if x.channels() != kernel.in_channels {
        return Err(NeuralError::ChannelMismatch {
            expected: kernel.in_channels,
            got: x.channels(),
        });
    }
    if upstream.shape() != (x.length(), kernel.out_channels) {
        return Err(NeuralError::ShapeMismatch {
            expected: (x.length(), kernel.out_channels),
            got: upstream.shape(),
        });
    }
    let len = x.length();
    let (cin, cout) = (kernel.in_channels, kernel.out_channels);
    let half = kernel.taps / 2;
    let mut grad_x = Tensor2::zeros(len, cin);
    let mut grad_k = ConvKernel::zeros(kernel.taps, cin, cout);
    // Kernel transposed to [tap][out][in] so the input gradient row is a
    // contiguous axpy per (tap, out) pair.
    let mut transposed = vec![0.0; kernel.data.len()];
    for j in 0..kernel.taps {
        for c in 0..cin {
            for o in 0..cout {
                transposed[(j * cout + o) * cin + c] = kernel.data[kernel.index(j, c) + o];
            }
        }
    }
    let xd = x.data();
    let ud = upstream.data();
    let gx = grad_x.data_mut();
    for t in 0..len {
        let urow = &ud[t * cout..(t + 1) * cout];
        if urow.iter().all(|&u| u == 0.0) {
            continue;
        }
        for j in 0..kernel.taps {
            let Some(src) = (t + j).checked_sub(half).filter(|&s| s < len) else {
                continue;
            };
            let xrow = &xd[src * cin..(src + 1) * cin];
            for (c, &xv) in xrow.iter().enumerate() {
                let k0 = kernel.index(j, c);
                for (g, &u) in grad_k.data[k0..k0 + cout].iter_mut().zip(urow) {
                    *g += xv * u;
                }
            }
            let gxrow = &mut gx[src * cin..(src + 1) * cin];
            for (o, &u) in urow.iter().enumerate() {
                if u == 0.0 {
                    continue;
                }
                let k0 = (j * cout + o) * cin;
                for (g, &kv) in gxrow.iter_mut().zip(&transposed[k0..k0 + cin]) {
                    *g += u * kv;
                }
            }
        }
    }
    Ok((grad_x, grad_k))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent triple-loop oracle, written against `get` only.
    fn direct(x: &Tensor2, k: &ConvKernel) -> Vec<f64> {
        let half = k.taps as isize / 2;
        let mut out = vec![0.0; x.length() * k.out_channels];
        for t in 0..x.length() as isize {
            for o in 0..k.out_channels {
                let mut s = 0.0;
                for j in 0..k.taps as isize {
                    let src = t + j - half;
                    if src < 0 || src >= x.length() as isize {
                        continue;
                    }
                    for c in 0..k.in_channels {
                        s += x.get(src as usize, c)
                            * k.data[(j as usize * k.in_channels + c) * k.out_channels + o];
                    }
                }
                out[t as usize * k.out_channels + o] = s;
            }
        }
        out
    }

    #[test]
    fn edge_kernel() {
        let x = Tensor2::from_column(&[1.0, 2.0, 3.0, 4.0]);
        let k = ConvKernel::from_vec(3, 1, 1, vec![1.0, 0.0, -1.0]);
        let y = conv1d_forward(&x, &k).unwrap();
        assert_eq!(y.data(), &[-2.0, -2.0, -2.0, 3.0]);
        assert_eq!(y.data(), direct(&x, &k).as_slice());
    }

    #[test]
    fn identity_kernel() {
        let x = Tensor2::from_column(&[0.3, -1.0, 7.5]);
        let k = ConvKernel::from_vec(3, 1, 1, vec![0.0, 1.0, 0.0]);
        assert_eq!(conv1d_forward(&x, &k).unwrap(), x);
    }

    #[test]
    fn two_channel_sum() {
        let x = Tensor2::from_vec(vec![1.0; 4], 2, 2);
        let k = ConvKernel::from_vec(3, 2, 1, vec![1.0; 6]);
        let y = conv1d_forward(&x, &k).unwrap();
        assert_eq!(y.data(), &[4.0, 4.0]);
        assert_eq!(y.data(), direct(&x, &k).as_slice());
    }

    #[test]
    fn channel_mismatch() {
        let x = Tensor2::from_vec(vec![1.0; 4], 2, 2);
        let k = ConvKernel::zeros(3, 1, 1);
        assert_eq!(
            conv1d_forward(&x, &k).unwrap_err(),
            NeuralError::ChannelMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn backward_small_example() {
        let x = Tensor2::from_column(&[1.0, 2.0, 3.0]);
        let k = ConvKernel::from_vec(3, 1, 1, vec![1.0, 0.0, -1.0]);
        let up = Tensor2::from_column(&[1.0, 1.0, 1.0]);
        let (gx, gk) = conv1d_backward(&x, &k, &up).unwrap();
        assert_eq!(gk.data, vec![3.0, 6.0, 5.0]);
        // grad_x[s] = sum_t up[t] k[s - t + 1]
        assert_eq!(gx.data(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn backward_zero_upstream() {
        let x = Tensor2::from_vec((0..8).map(|v| v as f64).collect(), 4, 2);
        let k = ConvKernel::from_vec(3, 2, 3, (0..18).map(|v| v as f64 * 0.1).collect());
        let up = Tensor2::zeros(4, 3);
        let (gx, gk) = conv1d_backward(&x, &k, &up).unwrap();
        assert!(gx.data().iter().all(|&v| v == 0.0));
        assert!(gk.data.iter().all(|&v| v == 0.0));
        let bad = Tensor2::zeros(3, 3);
        assert!(matches!(
            conv1d_backward(&x, &k, &bad),
            Err(NeuralError::ShapeMismatch { .. })
        ));
    }
}
