use super::binning::{build_binning, HistogramBinning, DEFAULT_MAX_BINS};
use super::split::{best_split_sparse, leaf_value, BinStats, SplitCandidate, SplitParams};
use super::{BoostError, FeatureMatrix};
use crate::neural::sigmoid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthPolicy {
    /// Split every frontier node one depth at a time.
    Level,
    /// Always split the frontier leaf with the largest gain.
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub growth: GrowthPolicy,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub max_leaves: usize,
    pub split: SplitParams,
    pub max_bins: usize,
}

impl GbdtParams {
    /// Depth-bounded trees (depth 6, so at most 64 leaves).
    pub fn level() -> Self {
        GbdtParams {
            growth: GrowthPolicy::Level,
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: Some(6),
            max_leaves: 64,
            split: SplitParams::default(),
            max_bins: DEFAULT_MAX_BINS,
        }
    }

    /// Leaf-count-bounded trees (31 leaves, no depth limit).
    pub fn leaf() -> Self {
        GbdtParams {
            growth: GrowthPolicy::Leaf,
            max_depth: None,
            max_leaves: 31,
            ..Self::level()
        }
    }

    pub fn validate(&self) -> Result<(), BoostError> {
        let bad = |m: &str| Err(BoostError::BadParams(m.to_string()));
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_leaves < 2 {
            return bad("max_leaves must be at least 2");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be at least 1");
        }
        if !(self.split.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if !(self.split.gamma >= 0.0) || !(self.split.min_child_weight >= 0.0) {
            return bad("gamma and min_child_weight must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        bin: u16,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Raw leaf value for one feature row (`x <= threshold` goes left).
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match &nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Gradient and Hessian of the log-loss with respect to the raw score.
pub fn logistic_grad_hess(score: f64, label: bool) -> (f64, f64) {
    let p = sigmoid(score);
    (p - if label { 1.0 } else { 0.0 }, p * (1.0 - p))
}

/// Mean negative log-likelihood of probabilities against labels.
pub fn log_loss(probabilities: &[f64], labels: &[bool]) -> f64 {
    let eps = 1e-15;
    let total: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(eps, 1.0 - eps);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / probabilities.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: GbdtParams,
    pub n_features: usize,
    pub base_score: f64,
    pub binning: HistogramBinning,
    pub trees: Vec<Tree>,
}

impl GbdtModel {
    pub fn predict_raw(&self, x: &[f64]) -> f64 {
        self.base_score
            + self.params.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.predict_raw(x))
    }

    /// The ensemble restricted to its first `n` trees.
    pub fn truncated(&self, n: usize) -> GbdtModel {
        GbdtModel {
            trees: self.trees[..n.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }
}

struct Grower<'a> {
    binned: &'a [u16],
    rows: usize,
    binning: &'a HistogramBinning,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbdtParams,
    scratch: Vec<BinStats>,
    touched: Vec<u16>,
}

#[derive(Clone, Copy)]
struct FoundSplit {
    feature: usize,
    cand: SplitCandidate,
}

struct Pending {
    id: usize,
    samples: Vec<u32>,
    depth: usize,
    split: Option<FoundSplit>,
}

impl Grower<'_> {
    fn find_split(&mut self, samples: &[u32], depth: usize) -> Option<FoundSplit> {
        if self.params.max_depth.is_some_and(|d| depth >= d) {
            return None;
        }
        let mut best: Option<FoundSplit> = None;
        for j in 0..self.binning.cuts.len() {
            let nb = self.binning.n_bins(j);
            if nb < 2 {
                continue;
            }
            let column = &self.binned[j * self.rows..(j + 1) * self.rows];
            self.scratch.clear();
            self.scratch.resize(nb, BinStats::default());
            self.touched.clear();
            for &i in samples {
                let b = column[i as usize];
                let s = &mut self.scratch[b as usize];
                if s.count == 0 {
                    self.touched.push(b);
                }
                s.add(self.grad[i as usize], self.hess[i as usize]);
            }
            if self.touched.len() < 2 {
                continue;
            }
            // Sparse and dense scans agree exactly; pick the cheaper one.
            let cand = if self.touched.len() * 8 < nb {
                self.touched.sort_unstable();
                let scratch = &self.scratch;
                best_split_sparse(
                    self.touched.iter().map(|&b| (b, scratch[b as usize])),
                    &self.params.split,
                )
            } else {
                best_split_sparse(
                    self.scratch.iter().enumerate().map(|(b, s)| (b as u16, *s)),
                    &self.params.split,
                )
            };
            if let Some(c) = cand {
                if best.is_none_or(|b| c.gain > b.cand.gain) {
                    best = Some(FoundSplit { feature: j, cand: c });
                }
            }
        }
        best
    }

    fn leaf(&self, samples: &[u32]) -> f64 {
        let (g, h) = samples.iter().fold((0.0, 0.0), |(g, h), &i| {
            (g + self.grad[i as usize], h + self.hess[i as usize])
        });
        leaf_value(g, h, self.params.split.lambda)
    }

    fn partition(&self, samples: Vec<u32>, split: FoundSplit) -> (Vec<u32>, Vec<u32>) {
        let column = &self.binned[split.feature * self.rows..(split.feature + 1) * self.rows];
        samples
            .into_iter()
            .partition(|&i| column[i as usize] <= split.cand.bin)
    }

    fn apply_split(&self, nodes: &mut Vec<TreeNode>, p: Pending, split: FoundSplit) -> [Pending; 2] {
        let (l, r) = self.partition(p.samples, split);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes[p.id] = TreeNode::Split {
            feature: split.feature,
            bin: split.cand.bin,
            threshold: self.binning.cuts[split.feature][split.cand.bin as usize],
            left,
            right: left + 1,
        };
        [
            Pending { id: left, samples: l, depth: p.depth + 1, split: None },
            Pending { id: left + 1, samples: r, depth: p.depth + 1, split: None },
        ]
    }

    /// Grows one tree; `leaf_of[i]` receives the leaf value for sample `i`.
    fn grow(&mut self, leaf_of: &mut [f64]) -> Tree {
        let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
        let root = Pending {
            id: 0,
            samples: (0..self.rows as u32).collect(),
            depth: 0,
            split: None,
        };
        let mut finished: Vec<Pending> = Vec::new();
        let mut leaves = 1;
        match self.params.growth {
            GrowthPolicy::Level => {
                let mut frontier = vec![root];
                while !frontier.is_empty() {
                    let mut next = Vec::new();
                    for p in frontier {
                        let split = if leaves < self.params.max_leaves {
                            self.find_split(&p.samples, p.depth)
                        } else {
                            None
                        };
                        match split {
                            Some(s) => {
                                leaves += 1;
                                next.extend(self.apply_split(&mut nodes, p, s));
                            }
                            None => finished.push(p),
                        }
                    }
                    frontier = next;
                }
            }
            GrowthPolicy::Leaf => {
                let mut frontier = vec![Pending {
                    split: self.find_split(&root.samples, 0),
                    ..root
                }];
                while leaves < self.params.max_leaves {
                    // Highest gain wins; ties go to the lowest node id.
                    let mut pick: Option<usize> = None;
                    for (k, p) in frontier.iter().enumerate() {
                        if let Some(s) = p.split {
                            let better = match pick {
                                None => true,
                                Some(q) => {
                                    let other = frontier[q].split.unwrap().cand.gain;
                                    s.cand.gain > other
                                        || (s.cand.gain == other && p.id < frontier[q].id)
                                }
                            };
                            if better {
                                pick = Some(k);
                            }
                        }
                    }
                    let Some(k) = pick else { break };
                    let p = frontier.swap_remove(k);
                    let split = p.split.unwrap();
                    leaves += 1;
                    for mut child in self.apply_split(&mut nodes, p, split) {
                        child.split = self.find_split(&child.samples, child.depth);
                        frontier.push(child);
                    }
                }
                finished.extend(frontier);
            }
        }
        for p in finished {
            let value = self.leaf(&p.samples);
            nodes[p.id] = TreeNode::Leaf { value };
            for &i in &p.samples {
                leaf_of[i as usize] = value;
            }
        }
        Tree { nodes }
    }
}

pub fn gbdt_train(
    features: &FeatureMatrix,
    labels: &[bool],
    params: &GbdtParams,
) -> Result<GbdtModel, BoostError> {
    params.validate()?;
    super::check_training_set(features, labels)?;
    let positives = labels.iter().filter(|&&y| y).count();
    let prevalence = positives as f64 / labels.len() as f64;
    let base_score = (prevalence / (1.0 - prevalence)).ln();

    let binning = build_binning(features, params.max_bins)?;
    let binned = binning.bin_matrix(features);
    let rows = features.rows();
    let mut scores = vec![base_score; rows];
    let mut grad = vec![0.0; rows];
    let mut hess = vec![0.0; rows];
    let mut leaf_of = vec![0.0; rows];
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        for i in 0..rows {
            (grad[i], hess[i]) = logistic_grad_hess(scores[i], labels[i]);
        }
        let mut grower = Grower {
            binned: &binned,
            rows,
            binning: &binning,
            grad: &grad,
            hess: &hess,
            params,
            scratch: Vec::new(),
            touched: Vec::new(),
        };
        let tree = grower.grow(&mut leaf_of);
        for (s, &v) in scores.iter_mut().zip(&leaf_of) {
            *s += params.learning_rate * v;
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(BoostError::NonFiniteScore { round: t });
        }
        log::debug!("tree {t}: {} leaves, depth {}", tree.leaf_count(), tree.depth());
        trees.push(tree);
    }
    Ok(GbdtModel {
        params: params.clone(),
        n_features: features.cols(),
        base_score,
        binning,
        trees,
    })
}

pub fn gbdt_predict(model: &GbdtModel, features: &FeatureMatrix) -> Result<Vec<f64>, BoostError> {
    super::check_width(model.n_features, features)?;
    Ok((0..features.rows())
        .map(|i| model.predict_proba(features.row(i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (FeatureMatrix, Vec<bool>) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64])
            .collect();
        let labels = (0..40).map(|i| i >= 25).collect();
        (FeatureMatrix::from_rows(rows).unwrap(), labels)
    }

    #[test]
    fn base_score_is_prior_log_odds() {
        let (x, y) = toy();
        let m = gbdt_train(&x, &y, &GbdtParams { n_trees: 1, ..GbdtParams::level() }).unwrap();
        assert!((m.base_score - (15.0f64 / 25.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn separable_threshold_is_found() {
        let (x, y) = toy();
        let m = gbdt_train(&x, &y, &GbdtParams::level()).unwrap();
        match &m.trees[0].nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 24.5);
            }
            other => panic!("root is {other:?}"),
        }
        for i in 0..40 {
            assert_eq!(m.predict_proba(x.row(i)) >= 0.5, y[i]);
        }
    }

    #[test]
    fn trees_respect_limits() {
        let (x, y) = toy();
        let level = gbdt_train(&x, &y, &GbdtParams { max_depth: Some(2), ..GbdtParams::level() }).unwrap();
        assert!(level.trees.iter().all(|t| t.depth() <= 2 && t.leaf_count() <= 4));
        let leaf = gbdt_train(&x, &y, &GbdtParams { max_leaves: 3, ..GbdtParams::leaf() }).unwrap();
        assert!(leaf.trees.iter().all(|t| t.leaf_count() <= 3));
    }

    #[test]
    fn rejects_bad_params_and_labels() {
        let (x, y) = toy();
        let p = GbdtParams {
            split: SplitParams { lambda: 0.0, ..Default::default() },
            ..GbdtParams::level()
        };
        assert!(matches!(gbdt_train(&x, &y, &p), Err(BoostError::BadParams(_))));
        assert!(matches!(
            gbdt_train(&x, &[true; 40], &GbdtParams::level()),
            Err(BoostError::SingleClass)
        ));
        assert!(matches!(
            gbdt_train(&x, &y[..3], &GbdtParams::level()),
            Err(BoostError::LabelMismatch { .. })
        ));
    }

    #[test]
    fn gradient_and_hessian() {
        let (g, h) = logistic_grad_hess(0.0, true);
        assert_eq!((g, h), (-0.5, 0.25));
        let (g, _) = logistic_grad_hess(0.0, false);
        assert_eq!(g, 0.5);
    }
}
