use super::Activation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv1d,
    BatchNorm,
    MaxPool,
    Upsample,
    Dense,
    Relu,
    Sigmoid,
}

impl LayerKind {
    pub fn code(self) -> u8 {
        match self {
            LayerKind::Conv1d => 1,
            LayerKind::BatchNorm => 2,
            LayerKind::MaxPool => 3,
            LayerKind::Upsample => 4,
            LayerKind::Dense => 5,
            LayerKind::Relu => 6,
            LayerKind::Sigmoid => 7,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => LayerKind::Conv1d,
            2 => LayerKind::BatchNorm,
            3 => LayerKind::MaxPool,
            4 => LayerKind::Upsample,
            5 => LayerKind::Dense,
            6 => LayerKind::Relu,
            7 => LayerKind::Sigmoid,
            _ => return None,
        })
    }
}

/// Static description of one layer. Convolution and dense layers carry
/// their activation inline, matching one row of the architecture table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub in_channels: usize,
    /// Output channels (`filters` for convolutions).
    pub out_channels: usize,
    pub kernel_size: usize,
    pub stride: usize,
    /// Pool size or upsampling factor; 1 elsewhere.
    pub factor: usize,
    pub activation: Option<Activation>,
    pub has_bias: bool,
}

impl LayerSpec {
    fn base(name: &str, kind: LayerKind, in_channels: usize, out_channels: usize) -> Self {
        Self {
            name: name.to_string(),
            kind,
            in_channels,
            out_channels,
            kernel_size: 1,
            stride: 1,
            factor: 1,
            activation: None,
            has_bias: false,
        }
    }

    pub fn conv1d(name: &str, in_ch: usize, filters: usize, kernel_size: usize, act: Activation) -> Self {
        Self {
            kernel_size,
            activation: Some(act),
            ..Self::base(name, LayerKind::Conv1d, in_ch, filters)
        }
    }

    pub fn batchnorm(name: &str, channels: usize) -> Self {
        Self::base(name, LayerKind::BatchNorm, channels, channels)
    }

    pub fn maxpool(name: &str, channels: usize, size: usize) -> Self {
        Self {
            factor: size,
            stride: size,
            ..Self::base(name, LayerKind::MaxPool, channels, channels)
        }
    }

    pub fn upsample(name: &str, channels: usize, factor: usize) -> Self {
        Self {
            factor,
            ..Self::base(name, LayerKind::Upsample, channels, channels)
        }
    }

    pub fn dense(name: &str, in_ch: usize, units: usize, act: Activation) -> Self {
        Self {
            activation: Some(act),
            ..Self::base(name, LayerKind::Dense, in_ch, units)
        }
    }

    pub fn activation(name: &str, channels: usize, act: Activation) -> Self {
        let kind = match act {
            Activation::Relu => LayerKind::Relu,
            Activation::Sigmoid => LayerKind::Sigmoid,
        };
        Self::base(name, kind, channels, channels)
    }

    /// Output timesteps for an input of `len` timesteps.
    pub fn output_length(&self, len: usize) -> usize {
        match self.kind {
            LayerKind::Conv1d => len.div_ceil(self.stride),
            LayerKind::MaxPool => len.div_ceil(self.factor),
            LayerKind::Upsample => len * self.factor,
            _ => len,
        }
    }

    /// Optimizer-updated parameters (batch norm contributes gamma and beta
    /// only).
    pub fn trainable_parameters(&self) -> usize {
        match self.kind {
            LayerKind::BatchNorm => 2 * self.out_channels,
            _ => count_parameters(self),
        }
    }
}

/// Parameter count as tabulated for the architecture: bias-free weights,
/// and four values per batch-norm channel (gamma, beta, running mean,
/// running variance).
pub fn count_parameters(spec: &LayerSpec) -> usize {
    let bias = |n: usize| if spec.has_bias { n } else { 0 };
    match spec.kind {
        LayerKind::Conv1d => {
            spec.kernel_size * spec.in_channels * spec.out_channels + bias(spec.out_channels)
        }
        LayerKind::Dense => spec.in_channels * spec.out_channels + bias(spec.out_channels),
        LayerKind::BatchNorm => 4 * spec.out_channels,
        LayerKind::MaxPool | LayerKind::Upsample | LayerKind::Relu | LayerKind::Sigmoid => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_counts() {
        assert_eq!(count_parameters(&LayerSpec::conv1d("c", 1, 32, 3, Activation::Relu)), 96);
        assert_eq!(count_parameters(&LayerSpec::batchnorm("bn", 32)), 128);
        assert_eq!(count_parameters(&LayerSpec::dense("d", 32, 1, Activation::Sigmoid)), 32);
        assert_eq!(count_parameters(&LayerSpec::maxpool("p", 32, 2)), 0);
        assert_eq!(LayerSpec::batchnorm("bn", 32).trainable_parameters(), 64);
    }

    #[test]
    fn shape_law() {
        let conv = LayerSpec::conv1d("c", 1, 32, 3, Activation::Relu);
        assert_eq!(conv.output_length(9000), 9000);
        assert_eq!(LayerSpec::maxpool("p", 1, 2).output_length(9), 5);
        assert_eq!(LayerSpec::upsample("u", 1, 2).output_length(1125), 2250);
    }

    #[test]
    fn kind_codes_roundtrip() {
        for code in 1..=7 {
            assert_eq!(LayerKind::from_code(code).unwrap().code(), code);
        }
        assert!(LayerKind::from_code(0).is_none());
    }
}
