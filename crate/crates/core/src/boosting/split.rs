use serde::{Deserialize, Serialize};

/// Gradient and Hessian sums over the samples that landed in one bin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinStats {
    pub grad: f64,
    pub hess: f64,
    pub count: u32,
}

impl BinStats {
    pub fn add(&mut self, grad: f64, hess: f64) {
        self.grad += grad;
        self.hess += hess;
        self.count += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    /// Samples in bins `<= bin` go left.
    pub bin: u16,
    pub gain: f64,
}

pub fn leaf_value(grad: f64, hess: f64, lambda: f64) -> f64 {
    -grad / (hess + lambda)
}

pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, params: &SplitParams) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + params.lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - params.gamma
}

/// Best cut over occupied bins given in ascending bin order. Empty bins may
/// be included or omitted; either way the lowest qualifying bin wins a tie.
pub(crate) fn best_split_sparse(
    bins: impl Iterator<Item = (u16, BinStats)> + Clone,
    params: &SplitParams,
) -> Option<SplitCandidate> {
    let mut total = BinStats::default();
    for (_, s) in bins.clone() {
        total.grad += s.grad;
        total.hess += s.hess;
        total.count += s.count;
    }
    let mut left = BinStats::default();
    let mut best: Option<SplitCandidate> = None;
    for (bin, s) in bins {
        left.grad += s.grad;
        left.hess += s.hess;
        left.count += s.count;
        let right_count = total.count - left.count;
        if left.count == 0 || right_count == 0 {
            continue;
        }
        let (gr, hr) = (total.grad - left.grad, total.hess - left.hess);
        if left.hess < params.min_child_weight || hr < params.min_child_weight {
            continue;
        }
        let gain = split_gain(left.grad, left.hess, gr, hr, params);
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            best = Some(SplitCandidate { bin, gain });
        }
    }
    best
}

/// Best cut of one feature's histogram (`hist[b]` holds bin `b`), or `None`
/// when no cut has positive gain under the child-weight constraint.
pub fn best_split(hist: &[BinStats], params: &SplitParams) -> Option<SplitCandidate> {
    best_split_sparse(
        hist.iter().enumerate().map(|(b, s)| (b as u16, *s)),
        params,
    )
}
