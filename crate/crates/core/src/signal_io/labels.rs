use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The four rhythm classes of the challenge corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "N")]
    Normal,
    #[serde(rename = "A")]
    AtrialFibrillation,
    #[serde(rename = "O")]
    Other,
    #[serde(rename = "~")]
    Noisy,
}

impl ClassTag {
    pub const ALL: [ClassTag; 4] = [
        ClassTag::Normal,
        ClassTag::AtrialFibrillation,
        ClassTag::Other,
        ClassTag::Noisy,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ClassTag::Normal => "N",
            ClassTag::AtrialFibrillation => "A",
            ClassTag::Other => "O",
            ClassTag::Noisy => "~",
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for ClassTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "N" => Ok(ClassTag::Normal),
            "A" => Ok(ClassTag::AtrialFibrillation),
            "O" => Ok(ClassTag::Other),
            "~" => Ok(ClassTag::Noisy),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error("line {line}: unknown class tag {tag:?}")]
    UnknownTag { line: usize, tag: String },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: expected \"id,tag\"")]
    Malformed { line: usize },
    #[error("positive class set must be a non-empty proper subset of N, A, O, ~")]
    BadPositiveClass,
}

/// Record id → class tag, plus the tag set that counts as positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelIndex {
    entries: BTreeMap<String, ClassTag>,
    positive_class: BTreeSet<ClassTag>,
}

impl LabelIndex {
    pub fn tag(&self, id: &str) -> Option<ClassTag> {
        self.entries.get(id).copied()
    }

    pub fn is_positive(&self, tag: ClassTag) -> bool {
        self.positive_class.contains(&tag)
    }

    pub fn positive_class(&self) -> &BTreeSet<ClassTag> {
        &self.positive_class
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, ClassTag)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Replace the positive-class convention. Default is `{A}`.
    pub fn with_positive_class(
        mut self,
        positive: impl IntoIterator<Item = ClassTag>,
    ) -> Result<Self, LabelError> {
        let set: BTreeSet<ClassTag> = positive.into_iter().collect();
        if set.is_empty() || set.len() == ClassTag::ALL.len() {
            return Err(LabelError::BadPositiveClass);
        }
        self.positive_class = set;
        Ok(self)
    }
}

/// Parse `id,tag` lines (the challenge's REFERENCE.csv layout).
pub fn load_labels(text: &str) -> Result<LabelIndex, LabelError> {
    let mut entries = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, tag) = line
            .split_once(',')
            .ok_or(LabelError::Malformed { line: idx + 1 })?;
        let id = id.trim();
        if id.is_empty() {
            return Err(LabelError::Malformed { line: idx + 1 });
        }
        let tag: ClassTag = tag.parse().map_err(|tag| LabelError::UnknownTag {
            line: idx + 1,
            tag,
        })?;
        if entries.insert(id.to_string(), tag).is_some() {
            return Err(LabelError::DuplicateId(id.to_string()));
        }
    }
    Ok(LabelIndex {
        entries,
        positive_class: BTreeSet::from([ClassTag::AtrialFibrillation]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let idx = load_labels("A00001,N\nA00002,A\n").unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.tag("A00002"), Some(ClassTag::AtrialFibrillation));
        assert!(idx.is_positive(ClassTag::AtrialFibrillation));
        assert!(!idx.is_positive(ClassTag::Normal));
    }

    #[test]
    fn rejects_unknown_and_duplicate() {
        assert_eq!(
            load_labels("A00001,Z").unwrap_err(),
            LabelError::UnknownTag { line: 1, tag: "Z".into() }
        );
        assert_eq!(
            load_labels("A1,N\nA1,A").unwrap_err(),
            LabelError::DuplicateId("A1".into())
        );
        assert_eq!(load_labels("A1 N").unwrap_err(), LabelError::Malformed { line: 1 });
    }

    #[test]
    fn positive_class_must_be_proper_subset() {
        let idx = load_labels("A1,~\n").unwrap();
        assert_eq!(
            idx.clone().with_positive_class([]).unwrap_err(),
            LabelError::BadPositiveClass
        );
        assert_eq!(
            idx.clone().with_positive_class(ClassTag::ALL).unwrap_err(),
            LabelError::BadPositiveClass
        );
        let idx = idx
            .with_positive_class([ClassTag::Normal, ClassTag::Other])
            .unwrap();
        assert!(idx.is_positive(ClassTag::Other));
        assert!(!idx.is_positive(ClassTag::Noisy));
    }
}
