use super::{DcaeError, DcaeModel};
use crate::neural::Tensor2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the `(timesteps x channels)` bottleneck becomes a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Channel mean per bottleneck position (1125 values at full size).
    #[default]
    Reduce,
    /// Every bottleneck value, timestep-major (18000 values at full size).
    Flatten,
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Reduce => "reduce",
            FeatureMode::Flatten => "flatten",
        })
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reduce" => Ok(FeatureMode::Reduce),
            "flatten" => Ok(FeatureMode::Flatten),
            other => Err(format!("unknown feature mode {other:?} (expected reduce or flatten)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub record_id: String,
    pub values: Vec<f64>,
}

impl DcaeModel {
    pub fn feature_len(&self, mode: FeatureMode) -> usize {
        let (len, ch) = self.bottleneck_shape();
        match mode {
            FeatureMode::Reduce => len,
            FeatureMode::Flatten => len * ch,
        }
    }
}

/// Run the encoder in inference mode and summarize the bottleneck.
pub fn encode_features(
    model: &DcaeModel,
    signal: &[f64],
    mode: FeatureMode,
) -> Result<Vec<f64>, DcaeError> {
    if signal.len() != model.input_length() {
        return Err(DcaeError::ShapeMismatch {
            expected: (model.input_length(), 1),
            got: (signal.len(), 1),
        });
    }
    let code = model.encode(&Tensor2::from_column(signal))?;
    Ok(match mode {
        FeatureMode::Flatten => code.into_data(),
        FeatureMode::Reduce => {
            let ch = code.channels() as f64;
            code.data()
                .chunks_exact(code.channels())
                .map(|row| row.iter().sum::<f64>() / ch)
                .collect()
        }
    })
}
