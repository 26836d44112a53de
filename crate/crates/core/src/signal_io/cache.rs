//! Seeded, stratified train/test cache of normalized signals.
//!
//! On-disk layout (all integers little-endian):
//!
//! ```text
//! "DBAF" | version u32 | record count u32
//! per record: id length u16 | id (UTF-8) | label u8 | 9000 x f32 | split u8
//! manifest length u32 | manifest (UTF-8 JSON)
//! ```

use super::labels::{ClassTag, LabelIndex};
use super::RawRecord;
use crate::preprocess::{PreprocessError, Signal, SIGNAL_LEN};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

pub const CACHE_MAGIC: &[u8; 4] = b"DBAF";
pub const CACHE_VERSION: u32 = 1;

/// Fraction of each class assigned to the test split.
pub const TEST_FRACTION: f64 = 0.3;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("records without a label: {}", .0.join(", "))]
    MissingLabel(Vec<String>),
    #[error("duplicate record id {0:?}")]
    DuplicateRecord(String),
    #[error("record {id}: {source}")]
    Preprocess {
        id: String,
        #[source]
        source: PreprocessError,
    },
    #[error("not a dataset cache (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    VersionMismatch(u32),
    #[error("corrupt cache: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CachedRecord {
    pub id: String,
    pub positive: bool,
    pub signal: Signal,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub positive: usize,
    pub negative: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub split_seed: u64,
    pub positive_class: Vec<ClassTag>,
    pub class_counts: BTreeMap<ClassTag, usize>,
    pub train: SplitCounts,
    pub test: SplitCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCache {
    pub records: Vec<CachedRecord>,
    pub split_seed: u64,
    pub manifest: Manifest,
}

impl DatasetCache {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &CachedRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

/// Normalize every record and assign a stratified 70/30 split.
///
/// Records are ordered by id before the seeded split, so the assignment
/// does not depend on input order.
pub fn build_cache(
    records: Vec<RawRecord>,
    labels: &LabelIndex,
    seed: u64,
) -> Result<DatasetCache, CacheError> {
    let missing: Vec<String> = records
        .iter()
        .filter(|r| labels.tag(r.id()).is_none())
        .map(|r| r.id().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CacheError::MissingLabel(missing));
    }

    let mut records = records;
    records.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = records.windows(2).find(|w| w[0].id() == w[1].id()) {
        return Err(CacheError::DuplicateRecord(w[0].id().to_string()));
    }

    let mut class_counts = BTreeMap::new();
    let mut cached = Vec::with_capacity(records.len());
    for raw in &records {
        let tag = labels.tag(raw.id()).expect("checked above");
        *class_counts.entry(tag).or_insert(0) += 1;
        let signal = Signal::from_raw(raw.samples()).map_err(|source| CacheError::Preprocess {
            id: raw.id().to_string(),
            source,
        })?;
        cached.push(CachedRecord {
            id: raw.id().to_string(),
            positive: labels.is_positive(tag),
            signal,
            split: Split::Train,
        });
    }

    let positives: Vec<bool> = cached.iter().map(|r| r.positive).collect();
    for (r, split) in cached.iter_mut().zip(stratified_split(&positives, seed)) {
        r.split = split;
    }

    let manifest = Manifest {
        split_seed: seed,
        positive_class: labels.positive_class().iter().copied().collect(),
        class_counts,
        train: count(&cached, Split::Train),
        test: count(&cached, Split::Test),
    };
    Ok(DatasetCache {
        records: cached,
        split_seed: seed,
        manifest,
    })
}

/// Assign each item to train or test so that every binary class
/// contributes `round(0.3 n)` members to the test split.
pub fn stratified_split(positive: &[bool], seed: u64) -> Vec<Split> {
    let mut splits = vec![Split::Train; positive.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in [true, false] {
        let mut members: Vec<usize> = (0..positive.len())
            .filter(|&i| positive[i] == class)
            .collect();
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * TEST_FRACTION).round() as usize;
        for &i in &members[..n_test] {
            splits[i] = Split::Test;
        }
    }
    splits
}

fn count(records: &[CachedRecord], split: Split) -> SplitCounts {
    let mut c = SplitCounts::default();
    for r in records.iter().filter(|r| r.split == split) {
        if r.positive {
            c.positive += 1;
        } else {
            c.negative += 1;
        }
    }
    c
}

pub fn encode_cache(cache: &DatasetCache) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + cache.records.len() * (SIGNAL_LEN * 4 + 16));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(cache.records.len() as u32).to_le_bytes());
    for r in &cache.records {
        let id = r.id.as_bytes();
        out.extend_from_slice(&(id.len() as u16).to_le_bytes());
        out.extend_from_slice(id);
        out.push(r.positive as u8);
        for v in r.signal.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(match r.split {
            Split::Train => 0,
            Split::Test => 1,
        });
    }
    let manifest = serde_json::to_vec(&cache.manifest).expect("manifest serializes");
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(&manifest);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        if self.bytes.len() - self.pos < n {
            return Err(CacheError::Corrupt(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CacheError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CacheError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_cache(bytes: &[u8]) -> Result<DatasetCache, CacheError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4).map_err(|_| CacheError::BadMagic)? != CACHE_MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = cur.u32()?;
    if version != CACHE_VERSION {
        return Err(CacheError::VersionMismatch(version));
    }
    let n = cur.u32()? as usize;
    let mut records = Vec::with_capacity(n.min(1 << 16));
    let mut seen = BTreeSet::new();
    for _ in 0..n {
        let id_len = cur.u16()? as usize;
        let id = std::str::from_utf8(cur.take(id_len)?)
            .map_err(|_| CacheError::Corrupt("record id is not UTF-8".into()))?
            .to_string();
        if !seen.insert(id.clone()) {
            return Err(CacheError::DuplicateRecord(id));
        }
        let positive = match cur.u8()? {
            0 => false,
            1 => true,
            b => return Err(CacheError::Corrupt(format!("record {id}: label byte {b}"))),
        };
        let raw = cur.take(SIGNAL_LEN * 4)?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let signal = Signal::from_values(values)
            .ok_or_else(|| CacheError::Corrupt(format!("record {id}: sample outside [0, 1]")))?;
        let split = match cur.u8()? {
            0 => Split::Train,
            1 => Split::Test,
            b => return Err(CacheError::Corrupt(format!("record {id}: split byte {b}"))),
        };
        records.push(CachedRecord {
            id,
            positive,
            signal,
            split,
        });
    }
    let m_len = cur.u32()? as usize;
    let manifest: Manifest = serde_json::from_slice(cur.take(m_len)?)
        .map_err(|e| CacheError::Corrupt(format!("manifest: {e}")))?;
    if cur.pos != bytes.len() {
        return Err(CacheError::Corrupt("trailing bytes after manifest".into()));
    }
    Ok(DatasetCache {
        records,
        split_seed: manifest.split_seed,
        manifest,
    })
}

pub fn write_cache(cache: &DatasetCache, path: &Path) -> Result<(), CacheError> {
    std::fs::write(path, encode_cache(cache))?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<DatasetCache, CacheError> {
    decode_cache(&std::fs::read(path)?)
}
