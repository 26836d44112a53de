//! Central-difference checks of every kernel's backward pass. Each check
//! contracts the layer output with a fixed random tensor `r`, so the scalar
//! objective is `sum(r * out)` and `r` is the upstream gradient.

use super::{dot, numeric_grad, rel_error, rng, uniform};
use deepboost_af::dcae::{Architecture, DcaeModel};
use deepboost_af::neural::{
    activation_backward, activation_forward, conv1d_backward, conv1d_forward, dense_backward,
    dense_forward, maxpool1d_backward, maxpool1d_forward, upsample1d_backward, upsample1d_forward,
    Activation, BatchNorm, ConvKernel, DenseWeights, Tensor2,
};
use rand::seq::SliceRandom;

const H: f64 = 1e-5;

/// `(check name, relative error)` for one gradient tensor.
pub type Check = (String, f64);

fn t(data: Vec<f64>, len: usize, ch: usize) -> Tensor2 {
    Tensor2::from_vec(data, len, ch)
}

pub fn conv(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (len, cin, cout, taps) = (11, 3, 4, 3);
    let x = uniform(&mut g, len * cin, -1.0, 1.0);
    let k = uniform(&mut g, taps * cin * cout, -1.0, 1.0);
    let r = uniform(&mut g, len * cout, -1.0, 1.0);
    let kernel = ConvKernel::from_vec(taps, cin, cout, k.clone());
    let up = t(r.clone(), len, cout);
    let (gx, gk) = conv1d_backward(&t(x.clone(), len, cin), &kernel, &up).unwrap();

    let nx = numeric_grad(
        |v| dot(&r, conv1d_forward(&t(v.to_vec(), len, cin), &kernel).unwrap().data()),
        &x,
        H,
    );
    let nk = numeric_grad(
        |v| {
            let kv = ConvKernel::from_vec(taps, cin, cout, v.to_vec());
            dot(&r, conv1d_forward(&t(x.clone(), len, cin), &kv).unwrap().data())
        },
        &k,
        H,
    );
    vec![
        ("conv input".into(), rel_error(gx.data(), &nx)),
        ("conv kernel".into(), rel_error(&gk.data, &nk)),
    ]
}

pub fn batchnorm(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (batch, len, ch) = (3, 7, 2);
    let x = uniform(&mut g, batch * len * ch, -2.0, 2.0);
    let r = uniform(&mut g, batch * len * ch, -1.0, 1.0);
    let mut bn = BatchNorm::new(ch);
    bn.gamma = uniform(&mut g, ch, 0.5, 1.5);
    bn.beta = uniform(&mut g, ch, -0.5, 0.5);
    let split = |v: &[f64]| -> Vec<Tensor2> {
        v.chunks(len * ch).map(|c| t(c.to_vec(), len, ch)).collect()
    };
    let objective = |bn: &BatchNorm, v: &[f64]| -> f64 {
        let (outs, _) = bn.forward_batch(&split(v)).unwrap();
        let flat: Vec<f64> = outs.iter().flat_map(|o| o.data().to_vec()).collect();
        dot(&r, &flat)
    };
    let (_, cache) = bn.forward_batch(&split(&x)).unwrap();
    let (gx, gg, gb) = bn.backward(&cache, &split(&r)).unwrap();
    let gx: Vec<f64> = gx.iter().flat_map(|o| o.data().to_vec()).collect();

    let nx = numeric_grad(|v| objective(&bn, v), &x, H);
    let ng = numeric_grad(
        |v| {
            let mut b = bn.clone();
            b.gamma = v.to_vec();
            objective(&b, &x)
        },
        &bn.gamma,
        H,
    );
    let nb = numeric_grad(
        |v| {
            let mut b = bn.clone();
            b.beta = v.to_vec();
            objective(&b, &x)
        },
        &bn.beta,
        H,
    );
    vec![
        ("batchnorm input".into(), rel_error(&gx, &nx)),
        ("batchnorm gamma".into(), rel_error(&gg, &ng)),
        ("batchnorm beta".into(), rel_error(&gb, &nb)),
    ]
}

pub fn dense(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (len, cin, cout) = (5, 4, 3);
    let x = uniform(&mut g, len * cin, -1.0, 1.0);
    let w = uniform(&mut g, cin * cout, -1.0, 1.0);
    let r = uniform(&mut g, len * cout, -1.0, 1.0);
    let weights = DenseWeights::from_vec(cin, cout, w.clone());
    let (gx, gw) = dense_backward(&t(x.clone(), len, cin), &weights, &t(r.clone(), len, cout)).unwrap();
    let nx = numeric_grad(
        |v| dot(&r, dense_forward(&t(v.to_vec(), len, cin), &weights).unwrap().data()),
        &x,
        H,
    );
    let nw = numeric_grad(
        |v| {
            let wv = DenseWeights::from_vec(cin, cout, v.to_vec());
            dot(&r, dense_forward(&t(x.clone(), len, cin), &wv).unwrap().data())
        },
        &w,
        H,
    );
    vec![
        ("dense input".into(), rel_error(gx.data(), &nx)),
        ("dense weights".into(), rel_error(&gw.data, &nw)),
    ]
}

pub fn activations(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (len, ch) = (6, 3);
    // Keep ReLU inputs away from the kink.
    let x: Vec<f64> = uniform(&mut g, len * ch, 0.05, 2.0)
        .into_iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { v } else { -v })
        .collect();
    let r = uniform(&mut g, len * ch, -1.0, 1.0);
    [Activation::Relu, Activation::Sigmoid]
        .into_iter()
        .map(|kind| {
            let y = activation_forward(&t(x.clone(), len, ch), kind);
            let gx = activation_backward(&y, &t(r.clone(), len, ch), kind).unwrap();
            let nx = numeric_grad(
                |v| dot(&r, activation_forward(&t(v.to_vec(), len, ch), kind).data()),
                &x,
                H,
            );
            (format!("{kind:?} input"), rel_error(gx.data(), &nx))
        })
        .collect()
}

pub fn maxpool(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (len, ch) = (9usize, 2);
    // Distinct values spaced 0.1 apart, so no window holds a tie within H.
    let mut x: Vec<f64> = (0..len * ch).map(|i| i as f64 * 0.1).collect();
    x.shuffle(&mut g);
    let out_len = len.div_ceil(2);
    let r = uniform(&mut g, out_len * ch, -1.0, 1.0);
    let (_, argmax) = maxpool1d_forward(&t(x.clone(), len, ch), 2);
    let gx = maxpool1d_backward(&argmax, &t(r.clone(), out_len, ch), len).unwrap();
    let nx = numeric_grad(
        |v| dot(&r, maxpool1d_forward(&t(v.to_vec(), len, ch), 2).0.data()),
        &x,
        H,
    );
    vec![("maxpool input".into(), rel_error(gx.data(), &nx))]
}

pub fn upsample(seed: u64) -> Vec<Check> {
    let mut g = rng(seed);
    let (len, ch) = (5, 3);
    let x = uniform(&mut g, len * ch, -1.0, 1.0);
    let r = uniform(&mut g, 2 * len * ch, -1.0, 1.0);
    let gx = upsample1d_backward(&t(r.clone(), 2 * len, ch), 2).unwrap();
    let nx = numeric_grad(
        |v| dot(&r, upsample1d_forward(&t(v.to_vec(), len, ch), 2).data()),
        &x,
        H,
    );
    vec![("upsample input".into(), rel_error(gx.data(), &nx))]
}

pub fn all_layers(seed: u64) -> Vec<Check> {
    [conv, batchnorm, dense, activations, maxpool, upsample]
        .iter()
        .flat_map(|f| f(seed))
        .collect()
}

/// Width-reduced network (same layer sequence, 64-sample input), two
/// signals, mean MSE in training mode. One check per parameter tensor.
pub fn end_to_end(seed: u64) -> Vec<Check> {
    let arch = Architecture {
        input_length: 64,
        widths: [6, 4, 4, 4, 4, 6],
    };
    let mut model = DcaeModel::new(arch, seed).unwrap();
    // Give batch-norm scales and shifts non-trivial values.
    let mut g = rng(seed ^ 0x5eed);
    for p in model.params.iter_mut() {
        if let deepboost_af::dcae::LayerParams::BatchNorm(bn) = p {
            bn.gamma = uniform(&mut g, bn.channels(), 0.5, 1.5);
            bn.beta = uniform(&mut g, bn.channels(), -0.3, 0.3);
        }
    }
    let batch: Vec<Tensor2> = (0..2)
        .map(|_| Tensor2::from_column(&uniform(&mut g, 64, 0.0, 1.0)))
        .collect();
    let (_, grads, _) = model.loss_and_gradients(&batch).unwrap();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|s| s.to_vec()).collect();

    let mut checks = Vec::new();
    let base = model.clone();
    for (ti, a) in analytic.iter().enumerate() {
        let mut probe = base.clone();
        let start: Vec<f64> = probe.trainable_slices_mut()[ti].to_vec();
        let n = numeric_grad(
            |v| {
                probe.trainable_slices_mut()[ti].copy_from_slice(v);
                probe.batch_loss(&batch).unwrap()
            },
            &start,
            H,
        );
        checks.push((format!("network tensor {ti}"), rel_error(a, &n)));
    }
    checks
}
