//! Linear SVM trained by stochastic subgradient descent on the primal
//! hinge-loss objective `0.5 * |w|^2 + C * sum(xi)`, one-vs-rest for
//! multiclass.
//!
//! Steps follow the Pegasos schedule shifted by one epoch's worth of
//! iterations (`eta_t = 1 / (lambda * (t + m))` with `lambda = 1/(C m)`), so
//! early steps stay bounded while the 1/t decay is kept. The weight vector
//! is carried as `scale * direction` so the per-step shrink costs O(1) and a
//! sparse sample update costs O(nnz).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

use super::FeatureVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmParams {
    /// One weight vector per class (one-vs-rest).
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub c: f64,
}

/// The primal objective `0.5 * |w|^2 + C * sum_i max(0, 1 - y_i (w x_i + b))`.
pub fn primal_objective(rows: &[FeatureVector], y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let norm_sq: f64 = w.iter().map(|v| v * v).sum();
    let hinge_sum: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let margin = yi * (sparse_dot(w, row) + b);
            (1.0 - margin).max(0.0)
        })
        .sum();
    0.5 * norm_sq + c * hinge_sum
}

fn sparse_dot(w: &[f64], x: &FeatureVector) -> f64 {
    x.nonzero().iter().map(|&(f, v)| w[f as usize] * v).sum()
}

pub(crate) struct BinaryFit {
    pub w: Vec<f64>,
    pub b: f64,
    /// Objective at the running-average iterate, sampled once per epoch.
    /// Only populated in trace mode (diagnostics and tests).
    #[allow(dead_code)]
    pub epoch_objectives: Vec<f64>,
}

/// Trains one binary problem (labels must be +1/-1). `trace` additionally
/// records the per-epoch averaged-iterate objective, used by diagnostics and
/// tests; it costs O(dim) per step, so production paths leave it off.
pub(crate) fn train_binary(
    rows: &[FeatureVector],
    y: &[f64],
    dim: usize,
    c: f64,
    epochs: usize,
    rng: &mut ChaCha8Rng,
    trace: bool,
) -> BinaryFit {
    let m = rows.len();
    let cm = c * m as f64;
    let t0 = m as f64;

    let mut direction = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..m).collect();
    let mut epoch_objectives = Vec::new();
    let mut avg_w = vec![0.0f64; dim];
    let mut avg_b = 0.0;
    let mut t = 0usize;

    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let step = 1.0 / (t as f64 + t0);
            let row = &rows[i];
            let margin = y[i] * (scale * sparse_dot(&direction, row) + b);
            scale *= 1.0 - step;
            if margin < 1.0 {
                let coeff = step * cm * y[i] / scale;
                for &(f, v) in row.nonzero() {
                    direction[f as usize] += coeff * v;
                }
                b += step * cm * y[i];
            }
            if trace {
                // running (Polyak) average over all steps so far
                for (a, d) in avg_w.iter_mut().zip(&direction) {
                    *a += scale * d;
                }
                avg_b += b;
            }
        }
        if trace {
            let inv = 1.0 / t as f64;
            let snapshot: Vec<f64> = avg_w.iter().map(|v| v * inv).collect();
            epoch_objectives.push(primal_objective(rows, y, &snapshot, avg_b * inv, c));
        }
    }

    let w = direction.iter().map(|&v| scale * v).collect();
    BinaryFit { w, b, epoch_objectives }
}

fn class_rng(seed: u64, class: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(class as u64 + 1)))
}

pub fn train_svm(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<SvmParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("C = {c} must be positive")));
    }
    if epochs < 1 {
        return Err(Error::InvalidParameter("epochs must be >= 1".into()));
    }
    let dim = rows[0].dim();

    let fits = par::map_indexed(n_classes, |class| {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let mut rng = class_rng(seed, class);
        train_binary(rows, &y, dim, c, epochs, &mut rng, false)
    });

    Ok(SvmParams {
        weights: fits.iter().map(|f| f.w.clone()).collect(),
        biases: fits.iter().map(|f| f.b).collect(),
        c,
    })
}

impl SvmParams {
    /// One-vs-rest decision values `w_c . x + b_c`.
    pub fn decision_values(&self, x: &FeatureVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, &b)| sparse_dot(w, x) + b)
            .collect()
    }

    /// Softmax over the decision values; an uncalibrated but deterministic
    /// probability surface whose argmax is the margin argmax.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let d = self.decision_values(x);
        let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = d.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / sum).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tree::argmax_first;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(values).unwrap()
    }

    fn separable_2d() -> (Vec<FeatureVector>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let jitter = (i as f64) * 0.05;
            rows.push(fv(&[2.0 + jitter, 0.3 * (i % 3) as f64]));
            labels.push(1);
            rows.push(fv(&[0.0, 0.35 * (i % 3) as f64 + 0.1]));
            labels.push(0);
        }
        (rows, labels)
    }

    #[test]
    fn separable_data_reaches_full_training_accuracy() {
        let (rows, labels) = separable_2d();
        let svm = train_svm(&rows, &labels, 2, 1.0, 60, 42).unwrap();
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| argmax_first(&svm.predict_proba(r)) == l)
            .count();
        assert_eq!(correct, rows.len());
    }

    #[test]
    fn epoch_averaged_objective_decreases_on_separable_data() {
        let (rows, labels) = separable_2d();
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fit = train_binary(&rows, &y, 2, 1.0, 40, &mut rng, true);
        assert_eq!(fit.epoch_objectives.len(), 40);
        for pair in fit.epoch_objectives.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "objective rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn all_identical_labels_degenerate_to_that_label() {
        let rows: Vec<FeatureVector> = (0..8).map(|i| fv(&[i as f64, 1.0])).collect();
        let labels = vec![0usize; 8]; // label set still has 2 classes
        let svm = train_svm(&rows, &labels, 2, 1.0, 30, 1).unwrap();
        for row in &rows {
            assert_eq!(argmax_first(&svm.predict_proba(row)), 0);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (rows, labels) = separable_2d();
        let a = train_svm(&rows, &labels, 2, 0.5, 10, 11).unwrap();
        let b = train_svm(&rows, &labels, 2, 0.5, 10, 11).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.biases, b.biases);
    }

    #[test]
    fn objective_close_to_exhaustive_grid_search() {
        // 20 samples, margin-2 separation along feature 0; the optimum
        // w ~ (0.5, 0), b ~ 0 lies on the grid lattice.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let wiggle = 0.02 * (i % 5) as f64;
            rows.push(fv(&[2.0 + wiggle, 0.1 * (i % 2) as f64]));
            y.push(1.0);
            rows.push(fv(&[0.0, 0.1 * (i % 2) as f64 + 0.05]));
            y.push(-1.0);
        }
        let c = 1.0;

        // coarse lattice over (w0, w1, b)
        let lattice: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.05).collect();
        let mut grid_best = f64::INFINITY;
        for &w0 in &lattice {
            for &w1 in &lattice[30..51] {
                for &b in &lattice[20..61] {
                    let j = primal_objective(&rows, &y, &[w0, w1], b, c);
                    if j < grid_best {
                        grid_best = j;
                    }
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fit = train_binary(&rows, &y, 2, c, 400, &mut rng, false);
        let trained = primal_objective(&rows, &y, &fit.w, fit.b, c);

        let rel = (trained - grid_best).abs() / grid_best;
        assert!(
            rel < 0.05,
            "trained objective {trained} vs grid {grid_best} (rel {rel})"
        );
    }
}
