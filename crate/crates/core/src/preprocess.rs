//! Per-record min-max normalization and fitting to the fixed network input
//! length.

use thiserror::Error;

/// Samples per record fed to the autoencoder: 30 s at 300 Hz.
pub const SIGNAL_LEN: usize = 9000;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("empty sample vector")]
    Empty,
    #[error("constant signal (every sample equals {0})")]
    ConstantSignal(f64),
}

/// Rescale `samples` so that its minimum maps to 0 and its maximum to 1.
pub fn min_max_normalize(samples: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    if samples.is_empty() {
        return Err(PreprocessError::Empty);
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    if range == 0.0 {
        return Err(PreprocessError::ConstantSignal(min));
    }
    // Clamp guards the last ulp; (max - min) / range can round above 1.
    Ok(samples
        .iter()
        .map(|&v| ((v - min) / range).clamp(0.0, 1.0))
        .collect())
}

/// Truncate to the first `target` samples or zero-pad up to `target`.
///
/// Padding is applied after normalization, so the pad value coincides with
/// the normalized minimum.
pub fn fit_length(samples: &[f64], target: usize) -> Vec<f64> {
    let mut out: Vec<f64> = samples.iter().take(target).copied().collect();
    out.resize(target, 0.0);
    out
}

/// A network-ready record: exactly [`SIGNAL_LEN`] values in `[0, 1]`.
///
/// Stored as `f32`, which is also the on-disk cache precision, so cache
/// round-trips are bit-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f32>,
}

impl Signal {
    /// Normalize and length-fit raw samples. Constant records become all
    /// zeros with a warning rather than failing a batch ingest.
    pub fn from_raw(samples: &[f64]) -> Result<Self, PreprocessError> {
        let normalized = match min_max_normalize(samples) {
            Ok(v) => v,
            Err(PreprocessError::ConstantSignal(c)) => {
                log::warn!("constant record (value {c}); using all-zero signal");
                vec![0.0; samples.len()]
            }
            Err(e) => return Err(e),
        };
        Ok(Self::from_normalized(&fit_length(&normalized, SIGNAL_LEN)))
    }

    fn from_normalized(values: &[f64]) -> Self {
        Self {
            values: values.iter().map(|&v| v as f32).collect(),
        }
    }

    /// Wrap already-prepared values. Returns `None` unless the length is
    /// [`SIGNAL_LEN`] and every value lies in `[0, 1]`.
    pub fn from_values(values: Vec<f32>) -> Option<Self> {
        let ok = values.len() == SIGNAL_LEN && values.iter().all(|v| (0.0..=1.0).contains(v));
        ok.then_some(Self { values })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}
