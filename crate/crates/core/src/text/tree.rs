//! Decision tree induction with axis-aligned threshold splits, plus the
//! split-search machinery shared by the forest and the boosting stumps.
//!
//! Split search is exhaustive over (feature, threshold) at each node:
//! candidate thresholds are midpoints between consecutive distinct feature
//! values present in the node. Because features are sparse and non-negative,
//! the zero value is handled as an implicit mass (node size minus the
//! nonzero count) rather than materialized per sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::FeatureVector;

/// Splitting criterion: Gini impurity or information gain (entropy).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    InfoGain,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "info_gain" => Ok(Criterion::InfoGain),
            other => Err(Error::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

fn impurity(criterion: Criterion, class_weights: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    match criterion {
        Criterion::Gini => {
            let mut sum_sq = 0.0;
            for &w in class_weights {
                let p = w / total;
                sum_sq += p * p;
            }
            1.0 - sum_sq
        }
        Criterion::InfoGain => {
            let mut h = 0.0;
            for &w in class_weights {
                if w > 0.0 {
                    let p = w / total;
                    h -= p * p.log2();
                }
            }
            h
        }
    }
}

/// Training-set view shared by the tree-family trainers.
pub(crate) struct SplitContext<'a> {
    pub rows: &'a [FeatureVector],
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl SplitContext<'_> {
    /// Per-class weight totals over `samples` (weight 1.0 when unweighted).
    pub fn class_weights(&self, samples: &[u32], weights: Option<&[f64]>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for &s in samples {
            let w = weights.map_or(1.0, |ws| ws[s as usize]);
            out[self.labels[s as usize]] += w;
        }
        out
    }
}

/// Which features a node may split on.
pub(crate) enum FeaturePool<'a> {
    All,
    Subset(&'a [u32]),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BestSplit {
    pub feature: u32,
    pub threshold: f64,
    /// Objective improvement over the unsplit node.
    pub gain: f64,
}

/// What the threshold scan maximizes.
#[derive(Clone, Copy)]
pub(crate) enum SplitObjective {
    /// Criterion improvement (weighted child impurity decrease).
    CriterionGain(Criterion),
    /// Weighted majority mass (equivalently, minimum weighted error); used
    /// by the boosting stumps.
    MajorityMass,
}

const MIN_GAIN: f64 = 1e-12;

/// Exhaustive best split over the pool. Returns `None` when no split beats
/// the unsplit node or satisfies `min_leaf` on both sides. Ties break to the
/// lowest feature index, then the lowest threshold.
pub(crate) fn find_best_split(
    ctx: &SplitContext,
    samples: &[u32],
    weights: Option<&[f64]>,
    pool: &FeaturePool,
    objective: SplitObjective,
    min_leaf: usize,
) -> Option<BestSplit> {
    let node_n = samples.len();
    if node_n < 2 * min_leaf.max(1) {
        return None;
    }
    let parent_weights = ctx.class_weights(samples, weights);
    let parent_total: f64 = parent_weights.iter().sum();

    // Gather every nonzero (feature, value, class, weight) in the node and
    // group by feature via one sort.
    let mut tuples: Vec<(u32, f64, usize, f64)> = Vec::new();
    let allowed: Option<&[u32]> = match pool {
        FeaturePool::All => None,
        FeaturePool::Subset(s) => Some(s),
    };
    for &s in samples {
        let si = s as usize;
        let w = weights.map_or(1.0, |ws| ws[si]);
        for &(f, v) in ctx.rows[si].nonzero() {
            let in_pool = match allowed {
                None => true,
                Some(set) => set.binary_search(&f).is_ok(),
            };
            if in_pool {
                tuples.push((f, v, ctx.labels[si], w));
            }
        }
    }
    if tuples.is_empty() {
        return None;
    }
    tuples.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Baseline the gain against the unsplit node.
    let parent_score = match objective {
        SplitObjective::CriterionGain(c) => -parent_total * impurity(c, &parent_weights, parent_total),
        SplitObjective::MajorityMass => parent_weights.iter().copied().fold(0.0, f64::max),
    };
    let child_score = |left: &[f64], lt: f64, right: &[f64], rt: f64| match objective {
        SplitObjective::CriterionGain(c) => {
            -(lt * impurity(c, left, lt) + rt * impurity(c, right, rt))
        }
        SplitObjective::MajorityMass => {
            left.iter().copied().fold(0.0, f64::max) + right.iter().copied().fold(0.0, f64::max)
        }
    };

    let mut best: Option<BestSplit> = None;
    let mut left = vec![0.0; ctx.n_classes];
    let mut right = vec![0.0; ctx.n_classes];

    let mut start = 0;
    while start < tuples.len() {
        let feature = tuples[start].0;
        let mut end = start;
        while end < tuples.len() && tuples[end].0 == feature {
            end += 1;
        }
        let group = &tuples[start..end];
        start = end;

        // Implicit zeros: samples without this feature.
        let zero_count = node_n - group.len();
        left.iter_mut().for_each(|w| *w = 0.0);
        let mut left_total = 0.0;
        let mut left_count = 0usize;
        let mut prev_value = 0.0;
        if zero_count > 0 {
            let mut zero_weights = parent_weights.clone();
            for &(_, _, class, w) in group {
                zero_weights[class] -= w;
            }
            for (l, z) in left.iter_mut().zip(&zero_weights) {
                *l = z.max(0.0);
            }
            left_total = left.iter().sum();
            left_count = zero_count;
        }

        let mut i = 0;
        while i < group.len() {
            // Candidate boundary before this distinct value (after zeros or
            // the previous value run).
            let value = group[i].1;
            if (left_count > 0 || zero_count > 0) && left_count >= min_leaf {
                let right_count = node_n - left_count;
                if right_count >= min_leaf && left_count > 0 && right_count > 0 {
                    for c in 0..ctx.n_classes {
                        right[c] = (parent_weights[c] - left[c]).max(0.0);
                    }
                    let rt = (parent_total - left_total).max(0.0);
                    let score = child_score(&left, left_total, &right, rt);
                    let gain = score - parent_score;
                    if gain > MIN_GAIN {
                        let threshold = (prev_value + value) / 2.0;
                        let better = match &best {
                            None => true,
                            Some(b) => gain > b.gain + MIN_GAIN,
                        };
                        if better {
                            best = Some(BestSplit { feature, threshold, gain });
                        }
                    }
                }
            }
            // Absorb the whole run of this value into the left side.
            while i < group.len() && group[i].1 == value {
                let (_, _, class, w) = group[i];
                left[class] += w;
                left_total += w;
                left_count += 1;
                i += 1;
            }
            prev_value = value;
        }
    }
    best
}

/// Partitions node samples by `x[feature] <= threshold`.
pub(crate) fn partition(
    ctx: &SplitContext,
    samples: &[u32],
    feature: u32,
    threshold: f64,
) -> (Vec<u32>, Vec<u32>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &s in samples {
        if ctx.rows[s as usize].get(feature) <= threshold {
            left.push(s);
        } else {
            right.push(s);
        }
    }
    (left, right)
}

/// A trained tree: internal threshold splits, leaves holding the class
/// frequency distribution of their training samples.
///
/// Serialization goes through a flat preorder node list ([`FlatTree`]):
/// trees grown on noisy data nest hundreds of levels deep, beyond JSON
/// recursion limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatTree", try_from = "FlatTree")]
pub enum TreeNode {
    Leaf { probs: Vec<f64> },
    Split {
        feature: u32,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// One node of the flattened tree; children reference later indices in
/// preorder.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FlatNode {
    Leaf { probs: Vec<f64> },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatTree {
    nodes: Vec<FlatNode>,
}

impl From<TreeNode> for FlatTree {
    fn from(root: TreeNode) -> Self {
        let mut nodes = Vec::new();
        // explicit stack; each frame writes its node and patches the parent
        enum Slot {
            Left(usize),
            Right(usize),
            Root,
        }
        let mut stack = vec![(root, Slot::Root)];
        while let Some((node, slot)) = stack.pop() {
            let index = nodes.len() as u32;
            match slot {
                Slot::Root => {}
                Slot::Left(parent) => {
                    if let FlatNode::Split { left, .. } = &mut nodes[parent] {
                        *left = index;
                    }
                }
                Slot::Right(parent) => {
                    if let FlatNode::Split { right, .. } = &mut nodes[parent] {
                        *right = index;
                    }
                }
            }
            match node {
                TreeNode::Leaf { probs } => nodes.push(FlatNode::Leaf { probs }),
                TreeNode::Split { feature, threshold, left, right } => {
                    let here = nodes.len();
                    nodes.push(FlatNode::Split { feature, threshold, left: 0, right: 0 });
                    // push right first so left is visited first (preorder)
                    stack.push((*right, Slot::Right(here)));
                    stack.push((*left, Slot::Left(here)));
                }
            }
        }
        FlatTree { nodes }
    }
}

impl TryFrom<FlatTree> for TreeNode {
    type Error = String;

    fn try_from(flat: FlatTree) -> std::result::Result<Self, String> {
        let n = flat.nodes.len();
        if n == 0 {
            return Err("empty tree".into());
        }
        // children always sit at higher indices, so building back to front
        // has every child ready when its parent needs it
        let mut built: Vec<Option<TreeNode>> = vec![None; n];
        for (i, node) in flat.nodes.iter().enumerate().rev() {
            let reconstructed = match node {
                FlatNode::Leaf { probs } => TreeNode::Leaf { probs: probs.clone() },
                FlatNode::Split { feature, threshold, left, right } => {
                    let (l, r) = (*left as usize, *right as usize);
                    if l <= i || r <= i || l >= n || r >= n {
                        return Err(format!("node {i} has out-of-order children {l}, {r}"));
                    }
                    let left_node = built[l].take().ok_or_else(|| format!("child {l} consumed twice"))?;
                    let right_node = built[r].take().ok_or_else(|| format!("child {r} consumed twice"))?;
                    TreeNode::Split {
                        feature: *feature,
                        threshold: *threshold,
                        left: Box::new(left_node),
                        right: Box::new(right_node),
                    }
                }
            };
            built[i] = Some(reconstructed);
        }
        built[0].take().ok_or_else(|| "missing root".into())
    }
}

impl TreeNode {
    pub fn predict_dist<'a>(&'a self, x: &FeatureVector) -> &'a [f64] {
        match self {
            TreeNode::Leaf { probs } => probs,
            TreeNode::Split { feature, threshold, left, right } => {
                if x.get(*feature) <= *threshold {
                    left.predict_dist(x)
                } else {
                    right.predict_dist(x)
                }
            }
        }
    }

    pub fn predict_class(&self, x: &FeatureVector) -> usize {
        argmax_first(self.predict_dist(x))
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// Argmax with ties to the lowest index (= earliest label in the set).
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeParams {
    pub root: TreeNode,
    /// Training label distribution; fallback for all-zero inputs.
    pub prior: Vec<f64>,
    pub criterion: Criterion,
}

impl TreeParams {
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        self.root.predict_dist(x).to_vec()
    }
}

pub(crate) struct GrowConfig {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_leaf: usize,
}

fn leaf_from(ctx: &SplitContext, samples: &[u32]) -> TreeNode {
    let counts = ctx.class_weights(samples, None);
    let total: f64 = counts.iter().sum();
    TreeNode::Leaf { probs: counts.into_iter().map(|c| c / total).collect() }
}

fn is_pure(ctx: &SplitContext, samples: &[u32]) -> bool {
    let first = ctx.labels[samples[0] as usize];
    samples.iter().all(|&s| ctx.labels[s as usize] == first)
}

/// Greedy top-down induction. `sample_features`, when present, draws a fresh
/// feature subset per node (random forest mode).
pub(crate) fn grow_tree(
    ctx: &SplitContext,
    samples: &[u32],
    depth: usize,
    cfg: &GrowConfig,
    sample_features: &mut Option<&mut dyn FnMut() -> Vec<u32>>,
) -> TreeNode {
    if samples.is_empty() {
        unreachable!("nodes always contain samples");
    }
    if depth >= cfg.max_depth || is_pure(ctx, samples) {
        return leaf_from(ctx, samples);
    }
    let subset;
    let pool = match sample_features.as_mut() {
        Some(f) => {
            subset = f();
            FeaturePool::Subset(&subset)
        }
        None => FeaturePool::All,
    };
    let found = find_best_split(
        ctx,
        samples,
        None,
        &pool,
        SplitObjective::CriterionGain(cfg.criterion),
        cfg.min_leaf,
    );
    match found {
        None => leaf_from(ctx, samples),
        Some(s) => {
            let (left_samples, right_samples) = partition(ctx, samples, s.feature, s.threshold);
            debug_assert!(!left_samples.is_empty() && !right_samples.is_empty());
            let left = grow_tree(ctx, &left_samples, depth + 1, cfg, sample_features);
            let right = grow_tree(ctx, &right_samples, depth + 1, cfg, sample_features);
            TreeNode::Split {
                feature: s.feature,
                threshold: s.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

/// Trains a single decision tree.
pub fn train_decision_tree(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    criterion: Criterion,
    max_depth: Option<usize>,
    min_leaf: usize,
) -> Result<TreeParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    if min_leaf == 0 {
        return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
    }
    let ctx = SplitContext { rows, labels, n_classes };
    let samples: Vec<u32> = (0..rows.len() as u32).collect();
    let cfg = GrowConfig {
        criterion,
        max_depth: max_depth.unwrap_or(usize::MAX),
        min_leaf,
    };
    let root = grow_tree(&ctx, &samples, 0, &cfg, &mut None);
    let counts = ctx.class_weights(&samples, None);
    let total: f64 = counts.iter().sum();
    Ok(TreeParams {
        root,
        prior: counts.into_iter().map(|c| c / total).collect(),
        criterion,
    })
}
