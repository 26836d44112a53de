//! Seeded two-class ECG-like recordings for tests and smoke runs.
//!
//! Every record has Gaussian beat spikes on a noisy baseline. Positive
//! records get irregular beat spacing and an added 5 Hz oscillation with a
//! fixed phase, so the classes are separable from the waveform alone.

use crate::preprocess::SIGNAL_LEN;
use crate::signal_io::{ClassTag, DEFAULT_SAMPLE_RATE_HZ};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub id: String,
    pub positive: bool,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub length: usize,
    pub oscillation_hz: f64,
    pub oscillation_amplitude: f64,
    pub noise_sd: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            length: SIGNAL_LEN,
            oscillation_hz: 5.0,
            oscillation_amplitude: 0.5,
            noise_sd: 0.05,
        }
    }
}

fn one_record(rng: &mut ChaCha8Rng, positive: bool, spec: &SyntheticSpec) -> Vec<f64> {
    let fs = DEFAULT_SAMPLE_RATE_HZ as f64;
    let noise = Normal::new(0.0, spec.noise_sd).expect("finite noise sd");
    let mut x: Vec<f64> = (0..spec.length).map(|_| noise.sample(rng)).collect();
    if positive {
        let w = 2.0 * std::f64::consts::PI * spec.oscillation_hz / fs;
        for (i, v) in x.iter_mut().enumerate() {
            *v += spec.oscillation_amplitude * (w * i as f64).sin();
        }
    }
    let width = 0.02 * fs;
    let mut beat = rng.random_range(0.0..0.8) * fs;
    while beat < spec.length as f64 {
        let lo = (beat - 4.0 * width).max(0.0) as usize;
        let hi = ((beat + 4.0 * width) as usize).min(spec.length);
        for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
            let d = (i as f64 - beat) / width;
            *v += (-0.5 * d * d).exp();
        }
        let rr = if positive {
            rng.random_range(0.4..1.2)
        } else {
            rng.random_range(0.75..0.85)
        };
        beat += rr * fs;
    }
    x
}

/// `n` records alternating negative, positive; ids are `S00001`, `S00002`, ...
pub fn generate(n: usize, seed: u64, spec: &SyntheticSpec) -> Vec<SyntheticRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let positive = i % 2 == 1;
            SyntheticRecord {
                id: format!("S{:05}", i + 1),
                positive,
                samples: one_record(&mut rng, positive, spec),
            }
        })
        .collect()
}

/// Write one CSV file per record plus a `REFERENCE.csv` label index
/// (positives tagged `A`, negatives `N`).
pub fn write_dataset(records: &[SyntheticRecord], records_dir: &Path, labels_path: &Path) -> io::Result<()> {
    std::fs::create_dir_all(records_dir)?;
    let mut labels = String::new();
    for r in records {
        let mut body = String::with_capacity(r.samples.len() * 8);
        for v in &r.samples {
            writeln!(body, "{v}").unwrap();
        }
        std::fs::write(records_dir.join(format!("{}.csv", r.id)), body)?;
        let tag = if r.positive { ClassTag::AtrialFibrillation } else { ClassTag::Normal };
        writeln!(labels, "{},{}", r.id, tag).unwrap();
    }
    std::fs::write(labels_path, labels)
}
