use super::{BoostError, FeatureMatrix};
use serde::{Deserialize, Serialize};

/// Floor on the weighted error, so a perfect stump gets a finite vote.
pub const EPSILON_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaBoostParams {
    pub n_rounds: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams { n_rounds: 50 }
    }
}

/// Votes `polarity` when `x[feature] > threshold`, `-polarity` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub alpha: f64,
}

impl Stump {
    pub fn vote(&self, x: &[f64]) -> f64 {
        let p = self.polarity as f64;
        if x[self.feature] > self.threshold {
            p
        } else {
            -p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RoundsExhausted,
    PerfectStump,
    NoBetterThanChance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub params: AdaBoostParams,
    pub n_features: usize,
    pub stop_reason: StopReason,
    pub stumps: Vec<Stump>,
}

impl AdaBoostModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.alpha * s.vote(x)).sum()
    }

    /// Positive unless the weighted vote is negative; ties go positive.
    pub fn predict_label(&self, x: &[f64]) -> bool {
        self.score(x) >= 0.0
    }
}

/// Per-round diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    /// Sample weights at the start of the round.
    pub weights: Vec<f64>,
    pub stump: Stump,
    pub epsilon: f64,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    polarity: i8,
    error: f64,
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Exhaustive weighted stump search. Candidates are visited by feature, then
/// threshold, then polarity (+1 first); only a strictly smaller error
/// replaces the incumbent.
fn best_stump(
    features: &FeatureMatrix,
    sorted: &[Vec<u32>],
    y: &[f64],
    w: &[f64],
) -> Option<Candidate> {
    let total: f64 = w.iter().sum();
    let negatives: f64 = w.iter().zip(y).filter(|(_, &y)| y < 0.0).map(|(w, _)| w).sum();
    let mut best: Option<Candidate> = None;
    for (j, order) in sorted.iter().enumerate() {
        // Threshold below every value: polarity +1 votes positive everywhere.
        let mut err = negatives;
        for k in 0..order.len() - 1 {
            let i = order[k] as usize;
            err += w[i] * y[i];
            let (lo, hi) = (features.get(i, j), features.get(order[k + 1] as usize, j));
            if lo == hi {
                continue;
            }
            for (polarity, e) in [(1i8, err), (-1i8, total - err)] {
                if best.as_ref().is_none_or(|b| e < b.error) {
                    best = Some(Candidate {
                        feature: j,
                        threshold: midpoint(lo, hi),
                        polarity,
                        error: e,
                    });
                }
            }
        }
    }
    best
}

pub fn adaboost_train_traced(
    features: &FeatureMatrix,
    labels: &[bool],
    params: &AdaBoostParams,
) -> Result<(AdaBoostModel, Vec<RoundTrace>), BoostError> {
    if params.n_rounds == 0 {
        return Err(BoostError::BadParams("n_rounds must be positive".into()));
    }
    super::check_training_set(features, labels)?;
    let n = features.rows();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let sorted: Vec<Vec<u32>> = (0..features.cols())
        .map(|j| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| features.get(a as usize, j).total_cmp(&features.get(b as usize, j)));
            order
        })
        .collect();

    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::RoundsExhausted;
    for round in 0..params.n_rounds {
        let Some(c) = best_stump(features, &sorted, &y, &w) else {
            return Err(BoostError::ConstantFeatures);
        };
        let mut stump = Stump {
            feature: c.feature,
            threshold: c.threshold,
            polarity: c.polarity,
            alpha: 0.0,
        };
        // Recompute the error directly rather than trusting running sums.
        let epsilon: f64 = (0..n)
            .filter(|&i| stump.vote(features.row(i)) != y[i])
            .map(|i| w[i])
            .sum();
        if epsilon >= 0.5 {
            if round == 0 {
                return Err(BoostError::NoBetterThanChance { epsilon });
            }
            stop_reason = StopReason::NoBetterThanChance;
            break;
        }
        let e = epsilon.max(EPSILON_MIN);
        stump.alpha = 0.5 * ((1.0 - e) / e).ln();
        trace.push(RoundTrace {
            weights: w.clone(),
            stump,
            epsilon,
        });
        stumps.push(stump);
        if epsilon <= EPSILON_MIN {
            stop_reason = StopReason::PerfectStump;
            break;
        }
        for i in 0..n {
            w[i] *= (-stump.alpha * y[i] * stump.vote(features.row(i))).exp();
        }
        let z: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= z;
        }
    }
    log::debug!("adaboost: {} stumps, stopped: {stop_reason:?}", stumps.len());
    Ok((
        AdaBoostModel {
            params: *params,
            n_features: features.cols(),
            stop_reason,
            stumps,
        },
        trace,
    ))
}

pub fn adaboost_train(
    features: &FeatureMatrix,
    labels: &[bool],
    params: &AdaBoostParams,
) -> Result<AdaBoostModel, BoostError> {
    adaboost_train_traced(features, labels, params).map(|(m, _)| m)
}
