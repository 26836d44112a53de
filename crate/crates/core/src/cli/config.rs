use super::CliError;
use crate::boosting::{AdaBoostParams, Algorithm, GbdtParams};
use crate::dcae::{FeatureMode, OptimizerConfig};
use crate::signal_io::ClassTag;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub records_dir: PathBuf,
    pub labels_file: PathBuf,
    pub cache_path: PathBuf,
    pub output_dir: PathBuf,
    pub split_seed: u64,
    #[serde(default = "default_positive_class")]
    pub positive_class: Vec<ClassTag>,
    pub dcae: DcaeSection,
    #[serde(default)]
    pub boosters: BoosterSections,
}

fn default_positive_class() -> Vec<ClassTag> {
    vec![ClassTag::AtrialFibrillation]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcaeSection {
    pub seed: u64,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub feature_mode: FeatureMode,
}

mod defaults {
    use crate::dcae::OptimizerConfig;

    pub fn epochs() -> usize {
        OptimizerConfig::default().epochs
    }
    pub fn batch_size() -> usize {
        OptimizerConfig::default().batch_size
    }
    pub fn learning_rate() -> f64 {
        OptimizerConfig::default().learning_rate
    }
}

impl DcaeSection {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            ..OptimizerConfig::default()
        }
    }
}

/// Hyperparameter overrides for one gradient-boosting variant; unset
/// fields keep the variant's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbdtSection {
    pub n_trees: Option<usize>,
    pub learning_rate: Option<f64>,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub min_child_weight: Option<f64>,
    pub max_bins: Option<usize>,
}

impl GbdtSection {
    pub fn apply(&self, mut p: GbdtParams) -> GbdtParams {
        if let Some(v) = self.n_trees {
            p.n_trees = v;
        }
        if let Some(v) = self.learning_rate {
            p.learning_rate = v;
        }
        if self.max_depth.is_some() {
            p.max_depth = self.max_depth;
        }
        if let Some(v) = self.max_leaves {
            p.max_leaves = v;
        }
        if let Some(v) = self.lambda {
            p.split.lambda = v;
        }
        if let Some(v) = self.gamma {
            p.split.gamma = v;
        }
        if let Some(v) = self.min_child_weight {
            p.split.min_child_weight = v;
        }
        if let Some(v) = self.max_bins {
            p.max_bins = v;
        }
        p
    }
}

/// One optional section per algorithm. A missing section means the
/// algorithm is not configured.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoosterSections {
    pub adaboost: Option<AdaBoostParams>,
    #[serde(rename = "gbdt-level")]
    pub gbdt_level: Option<GbdtSection>,
    #[serde(rename = "gbdt-leaf")]
    pub gbdt_leaf: Option<GbdtSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoosterParams {
    AdaBoost(AdaBoostParams),
    Gbdt(GbdtParams),
}

impl BoosterSections {
    pub fn is_configured(&self, algo: Algorithm) -> bool {
        match algo {
            Algorithm::AdaBoost => self.adaboost.is_some(),
            Algorithm::GbdtLevel => self.gbdt_level.is_some(),
            Algorithm::GbdtLeaf => self.gbdt_leaf.is_some(),
        }
    }

    /// Effective parameters; an unconfigured algorithm gets its defaults.
    pub fn params(&self, algo: Algorithm) -> BoosterParams {
        match algo {
            Algorithm::AdaBoost => BoosterParams::AdaBoost(self.adaboost.unwrap_or_default()),
            Algorithm::GbdtLevel => BoosterParams::Gbdt(
                self.gbdt_level.clone().unwrap_or_default().apply(GbdtParams::level()),
            ),
            Algorithm::GbdtLeaf => BoosterParams::Gbdt(
                self.gbdt_leaf.clone().unwrap_or_default().apply(GbdtParams::leaf()),
            ),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub feature_mode: Option<FeatureMode>,
    pub positive_class: Option<Vec<ClassTag>>,
}

impl PipelineConfig {
    /// Parse, resolve relative paths against the config file's directory,
    /// and apply overrides.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                CliError::MissingInput(format!("config file not found: {}", path.display()))
            }
            _ => CliError::Failed(format!("{}: {e}", path.display())),
        })?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.records_dir,
            &mut cfg.labels_file,
            &mut cfg.cache_path,
            &mut cfg.output_dir,
        ] {
            if p.as_os_str().is_empty() {
                return Err(CliError::Parse("config paths must be non-empty".into()));
            }
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(seed) = overrides.seed {
            cfg.split_seed = seed;
            cfg.dcae.seed = seed;
        }
        if let Some(mode) = overrides.feature_mode {
            cfg.dcae.feature_mode = mode;
        }
        if let Some(pc) = &overrides.positive_class {
            cfg.positive_class = pc.clone();
        }
        cfg.dcae
            .optimizer()
            .validate()
            .map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "records_dir": "records", "labels_file": "REFERENCE.csv",
        "cache_path": "out/cache.bin", "output_dir": "out",
        "split_seed": 7, "dcae": {"seed": 1}
    }"#;

    fn load(text: &str, o: &Overrides) -> Result<PipelineConfig, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, text).unwrap();
        PipelineConfig::load(&path, o)
    }

    #[test]
    fn defaults_and_relative_paths() {
        let c = load(MINIMAL, &Overrides::default()).unwrap();
        assert!(c.records_dir.is_absolute());
        assert_eq!(c.dcae.epochs, 30);
        assert_eq!(c.dcae.batch_size, 32);
        assert_eq!(c.dcae.feature_mode, FeatureMode::Reduce);
        assert_eq!(c.positive_class, vec![ClassTag::AtrialFibrillation]);
        assert!(!c.boosters.is_configured(Algorithm::AdaBoost));
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(99),
            feature_mode: Some(FeatureMode::Flatten),
            positive_class: Some(vec![ClassTag::Normal]),
        };
        let c = load(MINIMAL, &o).unwrap();
        assert_eq!((c.split_seed, c.dcae.seed), (99, 99));
        assert_eq!(c.dcae.feature_mode, FeatureMode::Flatten);
        assert_eq!(c.positive_class, vec![ClassTag::Normal]);
    }

    #[test]
    fn seeds_are_required() {
        let text = MINIMAL.replace("\"split_seed\": 7,", "");
        assert!(matches!(load(&text, &Overrides::default()), Err(CliError::Parse(_))));
    }

    #[test]
    fn booster_sections_override_defaults() {
        let text = MINIMAL.replace(
            "\"dcae\"",
            r#""boosters": {"gbdt-leaf": {"n_trees": 5}, "adaboost": {}}, "dcae""#,
        );
        let c = load(&text, &Overrides::default()).unwrap();
        match c.boosters.params(Algorithm::GbdtLeaf) {
            BoosterParams::Gbdt(p) => {
                assert_eq!(p.n_trees, 5);
                assert_eq!(p.max_leaves, 31);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            c.boosters.params(Algorithm::AdaBoost),
            BoosterParams::AdaBoost(AdaBoostParams::default())
        );
        assert!(!c.boosters.is_configured(Algorithm::GbdtLevel));
    }

    #[test]
    fn missing_file_is_missing_input() {
        let r = PipelineConfig::load(Path::new("/nonexistent/cfg.json"), &Overrides::default());
        assert!(matches!(r, Err(CliError::MissingInput(_))));
    }
}
