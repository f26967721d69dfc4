//! K-nearest neighbors with Minkowski distances.
//!
//! The model stores the training set; prediction ranks neighbors by
//! `(distance, sample index)` so distance ties always break to the earlier
//! training sample, and the class vote breaks ties to the earlier label.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::FeatureVector;

/// Minkowski distance of order `p` between two sparse vectors. Only the
/// union of nonzero coordinates contributes (|0 - 0| adds nothing).
/// `p = 1` is Manhattan and `p = 2` Euclidean, computed with `abs`/`sqrt`
/// directly so they equal the textbook formulas without `powf` rounding.
pub fn minkowski(a: &FeatureVector, b: &FeatureVector, p: f64) -> f64 {
    let mut acc = 0.0f64;
    let (xs, ys) = (a.nonzero(), b.nonzero());
    let (mut i, mut j) = (0, 0);
    let mut add = |d: f64| {
        let d = d.abs();
        if p == 1.0 {
            acc += d;
        } else if p == 2.0 {
            acc += d * d;
        } else {
            acc += d.powf(p);
        }
    };
    while i < xs.len() && j < ys.len() {
        match xs[i].0.cmp(&ys[j].0) {
            std::cmp::Ordering::Less => {
                add(xs[i].1);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                add(ys[j].1);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                add(xs[i].1 - ys[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    while i < xs.len() {
        add(xs[i].1);
        i += 1;
    }
    while j < ys.len() {
        add(ys[j].1);
        j += 1;
    }
    if p == 1.0 {
        acc
    } else if p == 2.0 {
        acc.sqrt()
    } else {
        acc.powf(1.0 / p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub p: f64,
    pub n_classes: usize,
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<u32>,
}

pub fn train_knn(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    k: usize,
    p: f64,
) -> Result<KnnParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    if k < 1 || k > rows.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} out of range [1, {}]",
            rows.len()
        )));
    }
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("Minkowski order p = {p} must be >= 1")));
    }
    Ok(KnnParams {
        k,
        p,
        n_classes,
        rows: rows.to_vec(),
        labels: labels.iter().map(|&l| l as u32).collect(),
    })
}

impl KnnParams {
    /// Vote fractions among the k nearest neighbors.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let mut dists: Vec<(f64, u32)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| (minkowski(row, x, self.p), i as u32))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0f64; self.n_classes];
        for &(_, idx) in dists.iter().take(self.k) {
            votes[self.labels[idx as usize] as usize] += 1.0;
        }
        for v in &mut votes {
            *v /= self.k as f64;
        }
        votes
    }
}
