use super::{NeuralError, Tensor2};

/// Non-overlapping max pooling (window = stride = `size`) in ceil mode.
///
/// The final partial window of an odd-length input behaves as if padded
/// with negative infinity. `argmax[t_out * channels + c]` holds the input
/// timestep that won each output cell; ties go to the lower index.
pub fn maxpool1d_forward(x: &Tensor2, size: usize) -> (Tensor2, Vec<usize>) {
    assert!(size > 0, "pool size must be positive");
    let ch = x.channels();
    let out_len = x.length().div_ceil(size);
    let mut out = Tensor2::zeros(out_len, ch);
    let mut argmax = vec![0usize; out_len * ch];
    let od = out.data_mut();
    for t in 0..out_len {
        let start = t * size;
        let end = (start + size).min(x.length());
        for c in 0..ch {
            let mut best = start;
            let mut best_v = x.get(start, c);
            for s in start + 1..end {
                let v = x.get(s, c);
                if v > best_v {
                    best = s;
                    best_v = v;
                }
            }
            od[t * ch + c] = best_v;
            argmax[t * ch + c] = best;
        }
    }
    (out, argmax)
}

/// Routes each upstream cell to the input position recorded in `argmax`.
pub fn maxpool1d_backward(
    argmax: &[usize],
    upstream: &Tensor2,
    input_length: usize,
) -> Result<Tensor2, NeuralError> {
    let ch = upstream.channels();
    if argmax.len() != upstream.data().len() {
        return Err(NeuralError::ShapeMismatch {
            expected: (argmax.len() / ch, ch),
            got: upstream.shape(),
        });
    }
    let mut grad = Tensor2::zeros(input_length, ch);
    let gd = grad.data_mut();
    for (i, (&src, &u)) in argmax.iter().zip(upstream.data()).enumerate() {
        if src >= input_length {
            return Err(NeuralError::IndexOutOfRange {
                index: src,
                length: input_length,
            });
        }
        gd[src * ch + i % ch] += u;
    }
    Ok(grad)
}

/// Nearest-neighbour upsampling: every timestep repeated `factor` times.
pub fn upsample1d_forward(x: &Tensor2, factor: usize) -> Tensor2 {
    assert!(factor > 0, "upsampling factor must be positive");
    let ch = x.channels();
    let mut data = Vec::with_capacity(x.data().len() * factor);
    for t in 0..x.length() {
        for _ in 0..factor {
            data.extend_from_slice(x.row(t));
        }
    }
    Tensor2::from_vec(data, x.length() * factor, ch)
}

/// Sums each group of `factor` upstream timesteps back onto its source.
pub fn upsample1d_backward(upstream: &Tensor2, factor: usize) -> Result<Tensor2, NeuralError> {
    assert!(factor > 0, "upsampling factor must be positive");
    let ch = upstream.channels();
    if upstream.length() % factor != 0 {
        return Err(NeuralError::ShapeMismatch {
            expected: (upstream.length() / factor * factor, ch),
            got: upstream.shape(),
        });
    }
    let len = upstream.length() / factor;
    let mut grad = Tensor2::zeros(len, ch);
    let gd = grad.data_mut();
    for t in 0..upstream.length() {
        let dst = t / factor;
        for (g, &u) in gd[dst * ch..(dst + 1) * ch].iter_mut().zip(upstream.row(t)) {
            *g += u;
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_examples() {
        let (y, arg) = maxpool1d_forward(&Tensor2::from_column(&[1.0, 3.0, 2.0, 5.0]), 2);
        assert_eq!(y.data(), &[3.0, 5.0]);
        assert_eq!(arg, vec![1, 3]);

        let (y, arg) = maxpool1d_forward(&Tensor2::from_column(&[7.0]), 2);
        assert_eq!(y.data(), &[7.0]);
        assert_eq!(arg, vec![0]);

        let (y, arg) = maxpool1d_forward(&Tensor2::from_column(&[2.0, 2.0, -1.0]), 2);
        assert_eq!(y.data(), &[2.0, -1.0]);
        assert_eq!(arg, vec![0, 2]);
    }

    #[test]
    fn pool_cascade_lengths() {
        let mut x = Tensor2::zeros(9000, 1);
        let mut lens = vec![];
        for _ in 0..3 {
            x = maxpool1d_forward(&x, 2).0;
            lens.push(x.length());
        }
        assert_eq!(lens, vec![4500, 2250, 1125]);
    }

    #[test]
    fn pool_backward_routes() {
        let g = maxpool1d_backward(&[1, 3], &Tensor2::from_column(&[10.0, 20.0]), 4).unwrap();
        assert_eq!(g.data(), &[0.0, 10.0, 0.0, 20.0]);
        let g = maxpool1d_backward(&[1, 3], &Tensor2::from_column(&[0.0, 0.0]), 4).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
        assert_eq!(
            maxpool1d_backward(&[1, 9], &Tensor2::from_column(&[1.0, 1.0]), 4).unwrap_err(),
            NeuralError::IndexOutOfRange { index: 9, length: 4 }
        );
    }

    #[test]
    fn upsample_examples() {
        let x = Tensor2::from_column(&[1.0, 2.0]);
        assert_eq!(upsample1d_forward(&x, 2).data(), &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(upsample1d_forward(&x, 1), x);

        let mut y = Tensor2::zeros(1125, 16);
        let mut lens = vec![];
        for _ in 0..3 {
            y = upsample1d_forward(&y, 2);
            lens.push(y.length());
        }
        assert_eq!(lens, vec![2250, 4500, 9000]);
    }

    #[test]
    fn upsample_backward_sums() {
        let g = upsample1d_backward(&Tensor2::from_column(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(g.data(), &[3.0, 7.0]);
        let g = upsample1d_backward(&Tensor2::zeros(4, 3), 2).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
        assert!(upsample1d_backward(&Tensor2::zeros(5, 1), 2).is_err());
    }
}
