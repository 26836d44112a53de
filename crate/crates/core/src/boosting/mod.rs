//! Boosted classifiers over fixed-length feature vectors: discrete AdaBoost
//! on decision stumps, and histogram gradient-boosted trees grown either
//! level-wise or leaf-wise.

mod adaboost;
mod binning;
mod gbdt;
mod split;

pub use adaboost::{
    adaboost_train, adaboost_train_traced, AdaBoostModel, AdaBoostParams, RoundTrace, StopReason,
    Stump, EPSILON_MIN,
};
pub use binning::{build_binning, HistogramBinning, DEFAULT_MAX_BINS};
pub use gbdt::{
    gbdt_predict, gbdt_train, log_loss, logistic_grad_hess, GbdtModel, GbdtParams, GrowthPolicy,
    Tree, TreeNode,
};
pub use split::{best_split, leaf_value, split_gain, BinStats, SplitCandidate, SplitParams};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("feature matrix is empty")]
    EmptyMatrix,
    #[error("ragged feature matrix: row {row} has {got} values, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("{labels} labels for {rows} feature rows")]
    LabelMismatch { rows: usize, labels: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("model expects {expected} features, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("every feature is constant")]
    ConstantFeatures,
    #[error("first stump is no better than chance (weighted error {epsilon})")]
    NoBetterThanChance { epsilon: f64 },
    #[error("non-finite score after round {round}")]
    NonFiniteScore { round: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("ensemble file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, BoostError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(BoostError::EmptyMatrix);
        }
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(BoostError::RaggedRows { row: i, expected: cols, got: row.len() });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(BoostError::NonFiniteFeature { row: i, col: j });
            }
            data.extend(row);
        }
        Ok(FeatureMatrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }
}

fn check_training_set(features: &FeatureMatrix, labels: &[bool]) -> Result<(), BoostError> {
    if labels.len() != features.rows() {
        return Err(BoostError::LabelMismatch {
            rows: features.rows(),
            labels: labels.len(),
        });
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(BoostError::SingleClass);
    }
    Ok(())
}

fn check_width(expected: usize, features: &FeatureMatrix) -> Result<(), BoostError> {
    if features.cols() != expected {
        return Err(BoostError::WidthMismatch { expected, got: features.cols() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "adaboost")]
    AdaBoost,
    #[serde(rename = "gbdt-level")]
    GbdtLevel,
    #[serde(rename = "gbdt-leaf")]
    GbdtLeaf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::AdaBoost, Algorithm::GbdtLevel, Algorithm::GbdtLeaf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AdaBoost => "adaboost",
            Algorithm::GbdtLevel => "gbdt-level",
            Algorithm::GbdtLeaf => "gbdt-leaf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected adaboost, gbdt-level or gbdt-leaf)"))
    }
}

/// A trained ensemble of either family, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoostEnsemble {
    Adaboost(AdaBoostModel),
    Gbdt(GbdtModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Weighted stump vote, or positive-class probability.
    pub score: f64,
    pub positive: bool,
}

impl BoostEnsemble {
    pub fn n_features(&self) -> usize {
        match self {
            BoostEnsemble::Adaboost(m) => m.n_features,
            BoostEnsemble::Gbdt(m) => m.n_features,
        }
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<Prediction>, BoostError> {
        check_width(self.n_features(), features)?;
        Ok((0..features.rows())
            .map(|i| {
                let x = features.row(i);
                match self {
                    BoostEnsemble::Adaboost(m) => {
                        let score = m.score(x);
                        Prediction { score, positive: score >= 0.0 }
                    }
                    BoostEnsemble::Gbdt(m) => {
                        let score = m.predict_proba(x);
                        Prediction { score, positive: score >= 0.5 }
                    }
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String, BoostError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, BoostError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), BoostError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BoostError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Train the chosen algorithm with its default hyperparameters.
pub fn train_ensemble(
    algorithm: Algorithm,
    features: &FeatureMatrix,
    labels: &[bool],
) -> Result<BoostEnsemble, BoostError> {
    Ok(match algorithm {
        Algorithm::AdaBoost => {
            BoostEnsemble::Adaboost(adaboost_train(features, labels, &AdaBoostParams::default())?)
        }
        Algorithm::GbdtLevel => BoostEnsemble::Gbdt(gbdt_train(features, labels, &GbdtParams::level())?),
        Algorithm::GbdtLeaf => BoostEnsemble::Gbdt(gbdt_train(features, labels, &GbdtParams::leaf())?),
    })
}
