//! Gaussian naive Bayes: per-class priors and per-feature Gaussian
//! likelihoods, MAP prediction.
//!
//! Variances are population variances with a relative floor of
//! `1e-9 * max feature variance` (absolute floor `1e-12` when every feature
//! is constant), so zero-variance features cannot produce singular
//! densities. Prediction works in log space; the sparse representation is
//! handled by precomputing each class's log-density at the all-zero vector
//! and correcting only the nonzero coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::FeatureVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianNbParams {
    pub priors: Vec<f64>,
    /// `means[class][feature]`
    pub means: Vec<Vec<f64>>,
    /// `vars[class][feature]`, floored
    pub vars: Vec<Vec<f64>>,
    /// Per-class log density of the all-zero vector (sparse shortcut).
    pub zero_log_density: Vec<f64>,
}

const LN_2PI: f64 = 1.8378770664093453;

fn log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln()) - d * d / (2.0 * var)
}

pub fn train_gaussian_nb(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
) -> Result<GaussianNbParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    let dim = rows[0].dim();
    let n = rows.len();

    let mut counts = vec![0usize; n_classes];
    let mut sums = vec![vec![0.0f64; dim]; n_classes];
    let mut sq_sums = vec![vec![0.0f64; dim]; n_classes];
    for (row, &label) in rows.iter().zip(labels) {
        counts[label] += 1;
        for &(f, v) in row.nonzero() {
            sums[label][f as usize] += v;
            sq_sums[label][f as usize] += v * v;
        }
    }
    for (class, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::ClassTooSmall {
                label: format!("class {class}"),
                count: 0,
                action: "estimate a Gaussian per class".into(),
            });
        }
    }

    let mut means = vec![vec![0.0f64; dim]; n_classes];
    let mut vars = vec![vec![0.0f64; dim]; n_classes];
    let mut max_var = 0.0f64;
    for c in 0..n_classes {
        let nc = counts[c] as f64;
        for f in 0..dim {
            let mean = sums[c][f] / nc;
            let var = (sq_sums[c][f] / nc - mean * mean).max(0.0);
            means[c][f] = mean;
            vars[c][f] = var;
            max_var = max_var.max(var);
        }
    }
    let floor = (1e-9 * max_var).max(1e-12);
    let mut zero_log_density = vec![0.0f64; n_classes];
    for c in 0..n_classes {
        for f in 0..dim {
            vars[c][f] = vars[c][f].max(floor);
            zero_log_density[c] += log_pdf(0.0, means[c][f], vars[c][f]);
        }
    }

    Ok(GaussianNbParams {
        priors: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        means,
        vars,
        zero_log_density,
    })
}

impl GaussianNbParams {
    /// Normalized posteriors via log-sum-exp.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let n_classes = self.priors.len();
        let mut log_post = vec![0.0f64; n_classes];
        for (c, post) in log_post.iter_mut().enumerate() {
            let mut score = self.priors[c].ln() + self.zero_log_density[c];
            for &(f, v) in x.nonzero() {
                let fi = f as usize;
                score += log_pdf(v, self.means[c][fi], self.vars[c][fi])
                    - log_pdf(0.0, self.means[c][fi], self.vars[c][fi]);
            }
            *post = score;
        }
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = log_post.iter().map(|&l| (l - max).exp()).collect();
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        probs
    }
}
