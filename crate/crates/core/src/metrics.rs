//! Confusion-matrix accumulation, the four evaluation ratios, and
//! training-time formatting.

use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{predictions} predictions for {truths} ground-truth labels")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("{0} is undefined: zero denominator")]
    UndefinedMetric(&'static str),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Merge counts from another shard.
    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }

    /// The same outcomes seen with the opposite class called positive.
    pub fn swap_positive(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

/// Count outcomes; `true` marks the positive class.
pub fn accumulate(predictions: &[bool], truths: &[bool]) -> Result<ConfusionMatrix, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p, t) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub precision: f64,
    pub f1: f64,
    pub total_training_time_s: Option<f64>,
}

fn ratio(num: u64, den: u64, name: &'static str) -> Result<f64, MetricsError> {
    if den == 0 {
        return Err(MetricsError::UndefinedMetric(name));
    }
    Ok(num as f64 / den as f64)
}

/// Harmonic mean of precision and sensitivity.
pub fn f1_score(precision: f64, sensitivity: f64) -> Result<f64, MetricsError> {
    if precision + sensitivity == 0.0 {
        return Err(MetricsError::UndefinedMetric("f1"));
    }
    Ok(2.0 * (precision * sensitivity) / (precision + sensitivity))
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricReport, MetricsError> {
    let accuracy = ratio(cm.tp + cm.tn, cm.fp + cm.fn_ + cm.tn + cm.tp, "accuracy")?;
    let sensitivity = ratio(cm.tp, cm.fn_ + cm.tp, "sensitivity")?;
    let precision = ratio(cm.tp, cm.fp + cm.tp, "precision")?;
    let f1 = f1_score(precision, sensitivity)?;
    Ok(MetricReport {
        accuracy,
        sensitivity,
        precision,
        f1,
        total_training_time_s: None,
    })
}

/// Run `f`, returning its value and the elapsed monotonic time.
pub fn time_block<T>(label: &str, f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    log::info!("{label}: {:.3} s", elapsed.as_secs_f64());
    (out, elapsed)
}

/// `H:MM:SS`, whole seconds (rounded to nearest).
pub fn format_hms(seconds: f64) -> String {
    let total = seconds.max(0.0).round() as u64;
    format!("{}:{:02}:{:02}", total / 3600, (total / 60) % 60, total % 60)
}
