//! Random forest: bagged decision trees with per-node feature subsampling,
//! majority vote at prediction.
//!
//! Each tree gets its own ChaCha stream seeded from `(master seed, tree
//! index)`, so training is deterministic and independent of how trees are
//! scheduled across workers. Disabling `bootstrap` turns off both the
//! resampling and the feature subsampling, making every tree the plain
//! decision tree over the full data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

use super::tree::{argmax_first, grow_tree, Criterion, GrowConfig, SplitContext, TreeNode};
use super::FeatureVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<TreeNode>,
    /// Training label distribution; fallback for all-zero inputs.
    pub prior: Vec<f64>,
    pub n_classes: usize,
    pub seed: u64,
    pub bootstrap: bool,
}

fn tree_rng(master_seed: u64, tree_index: usize) -> ChaCha8Rng {
    // Distinct stream per tree; mixing the index into the seed keeps trees
    // decorrelated without depending on draw order.
    ChaCha8Rng::seed_from_u64(master_seed.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(tree_index as u64 + 1)))
}

/// Samples `count` distinct feature indices, ascending.
fn sample_features(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..dim as u32).collect();
    for i in 0..count {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut chosen = pool[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

#[allow(clippy::too_many_arguments)]
pub fn train_random_forest(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    n_trees: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    bootstrap: bool,
    seed: u64,
) -> Result<ForestParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    if n_trees < 1 {
        return Err(Error::InvalidParameter("n_trees must be >= 1".into()));
    }
    if min_leaf == 0 {
        return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
    }
    let n = rows.len();
    let dim = rows[0].dim();
    let mtry = ((dim as f64).sqrt().floor() as usize).clamp(1, dim);
    let ctx = SplitContext { rows, labels, n_classes };
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        max_depth: max_depth.unwrap_or(usize::MAX),
        min_leaf,
    };

    let trees = par::map_indexed(n_trees, |t| {
        let mut rng = tree_rng(seed, t);
        let samples: Vec<u32> = if bootstrap {
            (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
        } else {
            (0..n as u32).collect()
        };
        if bootstrap {
            // Recursion draws one feature subset per node, in a fixed
            // depth-first order, so the stream is scheduling-independent.
            let mut draw = || sample_features(&mut rng, dim, mtry);
            grow_tree(&ctx, &samples, 0, &cfg, &mut Some(&mut draw))
        } else {
            grow_tree(&ctx, &samples, 0, &cfg, &mut None)
        }
    });

    let mut prior = vec![0.0; n_classes];
    for &l in labels {
        prior[l] += 1.0;
    }
    for p in &mut prior {
        *p /= n as f64;
    }

    Ok(ForestParams { trees, prior, n_classes, seed, bootstrap })
}

impl ForestParams {
    /// Vote fractions: each tree casts one vote for its predicted class, so
    /// the argmax of this distribution is the majority-vote prediction.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let mut votes = vec![0.0f64; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict_class(x)] += 1.0;
        }
        for v in &mut votes {
            *v /= self.trees.len() as f64;
        }
        votes
    }

    pub fn predict_class(&self, x: &FeatureVector) -> usize {
        argmax_first(&self.predict_proba(x))
    }
}
