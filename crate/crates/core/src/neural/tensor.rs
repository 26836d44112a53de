/// A single-sample activation: `length` timesteps by `channels` features,
/// stored timestep-major (`data[t * channels + c]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    data: Vec<f64>,
    length: usize,
    channels: usize,
}

impl Tensor2 {
    pub fn zeros(length: usize, channels: usize) -> Self {
        assert!(channels > 0, "tensor needs at least one channel");
        Self {
            data: vec![0.0; length * channels],
            length,
            channels,
        }
    }

    /// Panics if `data.len() != length * channels`.
    pub fn from_vec(data: Vec<f64>, length: usize, channels: usize) -> Self {
        assert!(channels > 0, "tensor needs at least one channel");
        assert_eq!(
            data.len(),
            length * channels,
            "data size must equal length x channels"
        );
        Self {
            data,
            length,
            channels,
        }
    }

    /// One-channel tensor over `values`.
    pub fn from_column(values: &[f64]) -> Self {
        Self::from_vec(values.to_vec(), values.len(), 1)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.length, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, t: usize, c: usize) -> f64 {
        self.data[t * self.channels + c]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.channels..(t + 1) * self.channels]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            length: self.length,
            channels: self.channels,
        }
    }
}
