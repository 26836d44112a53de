//! ECG record ingestion (MAT and CSV), label index, and the binary dataset
//! cache consumed by the rest of the pipeline.

mod cache;
mod labels;
mod mat;
mod text;

pub use cache::{
    build_cache, decode_cache, encode_cache, read_cache, stratified_split, write_cache,
    CacheError, CachedRecord, DatasetCache, Manifest, Split, SplitCounts, CACHE_MAGIC,
    CACHE_VERSION, TEST_FRACTION,
};
pub use labels::{load_labels, ClassTag, LabelError, LabelIndex};
pub use mat::{parse_mat_record, MatError};
pub use text::{parse_csv_record, CsvRecordError};

use thiserror::Error;

/// Sampling rate of the challenge corpus.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 300;

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("record {0:?} has no samples")]
    Empty(String),
    #[error("record {0:?} has a zero sample rate")]
    ZeroSampleRate(String),
}

/// One ECG recording as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    id: String,
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl RawRecord {
    pub fn new(
        id: impl Into<String>,
        samples: Vec<f64>,
        sample_rate_hz: u32,
    ) -> Result<Self, RecordError> {
        let id = id.into();
        if samples.is_empty() {
            return Err(RecordError::Empty(id));
        }
        if sample_rate_hz == 0 {
            return Err(RecordError::ZeroSampleRate(id));
        }
        Ok(Self {
            id,
            samples,
            sample_rate_hz,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }
}
