//! AdaBoost over depth-1 decision stumps, multiclass via the SAMME weight
//! formula `alpha = ln((1 - err) / err) + ln(K - 1)`.
//!
//! Each round fits the stump minimizing weighted misclassification error
//! (exhaustive over features and midpoint thresholds), reweights samples by
//! `exp(alpha)` on mistakes, and renormalizes. Boosting stops early when the
//! stump is no better than chance (`err >= 1 - 1/K`) or perfect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tree::{
    argmax_first, find_best_split, partition, FeaturePool, SplitContext, SplitObjective,
};
use super::FeatureVector;

/// A depth-1 tree: one threshold split with a class per side, or a single
/// constant class when no split improves on the majority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub split: Option<(u32, f64)>,
    pub left_class: u32,
    pub right_class: u32,
}

impl Stump {
    pub fn predict(&self, x: &FeatureVector) -> usize {
        match self.split {
            None => self.left_class as usize,
            Some((feature, threshold)) => {
                if x.get(feature) <= threshold {
                    self.left_class as usize
                } else {
                    self.right_class as usize
                }
            }
        }
    }
}

/// Fits the weighted-error-minimizing stump. Falls back to the weighted
/// majority class when no split helps.
pub(crate) fn fit_stump(ctx: &SplitContext, samples: &[u32], weights: &[f64]) -> Stump {
    let class_weights = ctx.class_weights(samples, Some(weights));
    let majority = argmax_first(&class_weights) as u32;
    let best = find_best_split(
        ctx,
        samples,
        Some(weights),
        &FeaturePool::All,
        SplitObjective::MajorityMass,
        1,
    );
    match best {
        None => Stump { split: None, left_class: majority, right_class: majority },
        Some(s) => {
            let (left, right) = partition(ctx, samples, s.feature, s.threshold);
            let lw = ctx.class_weights(&left, Some(weights));
            let rw = ctx.class_weights(&right, Some(weights));
            Stump {
                split: Some((s.feature, s.threshold)),
                left_class: argmax_first(&lw) as u32,
                right_class: argmax_first(&rw) as u32,
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    /// Training label distribution; fallback for all-zero inputs and for
    /// the degenerate no-rounds model.
    pub prior: Vec<f64>,
    pub n_classes: usize,
}

const PERFECT_ERR: f64 = 1e-10;

pub fn train_adaboost(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    n_rounds: usize,
) -> Result<AdaBoostParams> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidParameter("rows and labels must be non-empty and equal length".into()));
    }
    if n_rounds < 1 {
        return Err(Error::InvalidParameter("n_rounds must be >= 1".into()));
    }
    let n = rows.len();
    let k = n_classes as f64;
    let ctx = SplitContext { rows, labels, n_classes };
    let samples: Vec<u32> = (0..n as u32).collect();

    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();

    for _ in 0..n_rounds {
        let stump = fit_stump(&ctx, &samples, &weights);
        let err: f64 = rows
            .iter()
            .zip(labels)
            .zip(&weights)
            .filter(|((row, &label), _)| stump.predict(row) != label)
            .map(|(_, &w)| w)
            .sum();

        if err >= 1.0 - 1.0 / k {
            break; // no better than chance; keep the rounds trained so far
        }
        if err < PERFECT_ERR {
            let alpha = ((1.0 - PERFECT_ERR) / PERFECT_ERR).ln() + (k - 1.0).ln();
            stumps.push(stump);
            alphas.push(alpha);
            break;
        }
        let alpha = ((1.0 - err) / err).ln() + (k - 1.0).ln();
        for ((row, &label), w) in rows.iter().zip(labels).zip(&mut weights) {
            if stump.predict(row) != label {
                *w *= alpha.exp();
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        stumps.push(stump);
        alphas.push(alpha);
    }

    let mut prior = vec![0.0; n_classes];
    for &l in labels {
        prior[l] += 1.0;
    }
    for p in &mut prior {
        *p /= n as f64;
    }

    Ok(AdaBoostParams { stumps, alphas, prior, n_classes })
}

impl AdaBoostParams {
    /// Normalized weighted-vote shares `sum(alpha_t [h_t(x) = c]) / sum(alpha)`.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let total: f64 = self.alphas.iter().sum();
        if total <= 0.0 {
            return self.prior.clone();
        }
        let mut scores = vec![0.0f64; self.n_classes];
        for (stump, &alpha) in self.stumps.iter().zip(&self.alphas) {
            scores[stump.predict(x)] += alpha;
        }
        for s in &mut scores {
            *s /= total;
        }
        scores
    }

    pub fn predict_class(&self, x: &FeatureVector) -> usize {
        argmax_first(&self.predict_proba(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(values).unwrap()
    }

    #[test]
    fn separable_one_round_is_perfect() {
        let rows: Vec<FeatureVector> = [1.0, 2.0, 3.0, 7.0, 8.0, 9.0].iter().map(|&v| fv(&[v])).collect();
        let labels = vec![0, 0, 0, 1, 1, 1];
        let ada = train_adaboost(&rows, &labels, 2, 1).unwrap();
        assert_eq!(ada.stumps.len(), 1);
        assert!(ada.alphas[0] > 0.0);
        for (row, &label) in rows.iter().zip(&labels) {
            assert_eq!(ada.predict_class(row), label);
        }
    }

    #[test]
    fn weights_renormalize_each_round() {
        // Reimplements the boosting loop, checking the weight-sum invariant
        // after every round against the library's stump fitting.
        let rows: Vec<FeatureVector> = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
            .iter()
            .map(|&v| fv(&[v]))
            .collect();
        let labels = vec![0, 0, 1, 0, 1, 1, 0, 1, 1, 1];
        let ctx = SplitContext { rows: &rows, labels: &labels, n_classes: 2 };
        let samples: Vec<u32> = (0..10).collect();
        let mut weights = vec![0.1f64; 10];
        for _ in 0..4 {
            let stump = fit_stump(&ctx, &samples, &weights);
            let err: f64 = rows
                .iter()
                .zip(&labels)
                .zip(&weights)
                .filter(|((r, &l), _)| stump.predict(r) != l)
                .map(|(_, &w)| w)
                .sum();
            if err >= 0.5 || err < 1e-10 {
                break;
            }
            let alpha = ((1.0 - err) / err).ln();
            for ((r, &l), w) in rows.iter().zip(&labels).zip(&mut weights) {
                if stump.predict(r) != l {
                    *w *= alpha.exp();
                }
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    /// Independent oracle of the full SAMME recurrence: its own exhaustive
    /// stump search (dense scan) and its own weight updates.
    fn oracle_boost(
        dense: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        rounds: usize,
    ) -> (Vec<(Option<(usize, f64)>, usize, usize)>, Vec<f64>) {
        let n = dense.len();
        let k = n_classes as f64;
        let mut weights = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let mut alphas = Vec::new();
        for _ in 0..rounds {
            // exhaustive stump: maximize left+right weighted majority mass
            let majority = |w: &[f64], idx: &[usize]| -> usize {
                let mut cw = vec![0.0; n_classes];
                for &i in idx {
                    cw[labels[i]] += w[i];
                }
                let mut best = 0;
                for c in 1..n_classes {
                    if cw[c] > cw[best] {
                        best = c;
                    }
                }
                best
            };
            let mass = |w: &[f64], idx: &[usize]| -> f64 {
                let mut cw = vec![0.0; n_classes];
                for &i in idx {
                    cw[labels[i]] += w[i];
                }
                cw.into_iter().fold(0.0, f64::max)
            };
            let all: Vec<usize> = (0..n).collect();
            let base_mass = mass(&weights, &all);
            let mut best: Option<(usize, f64, f64)> = None;
            for f in 0..dense[0].len() {
                let mut vals: Vec<f64> = dense.iter().map(|r| r[f]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for w2 in vals.windows(2) {
                    let thr = (w2[0] + w2[1]) / 2.0;
                    let left: Vec<usize> = (0..n).filter(|&i| dense[i][f] <= thr).collect();
                    let right: Vec<usize> = (0..n).filter(|&i| dense[i][f] > thr).collect();
                    if left.is_empty() || right.is_empty() {
                        continue;
                    }
                    let m = mass(&weights, &left) + mass(&weights, &right);
                    let gain = m - base_mass;
                    if gain > 1e-12 {
                        let better = match best {
                            None => true,
                            Some((_, _, g)) => gain > g + 1e-12,
                        };
                        if better {
                            best = Some((f, thr, gain));
                        }
                    }
                }
            }
            let (split, lc, rc) = match best {
                None => {
                    let m = majority(&weights, &all);
                    (None, m, m)
                }
                Some((f, thr, _)) => {
                    let left: Vec<usize> = (0..n).filter(|&i| dense[i][f] <= thr).collect();
                    let right: Vec<usize> = (0..n).filter(|&i| dense[i][f] > thr).collect();
                    (Some((f, thr)), majority(&weights, &left), majority(&weights, &right))
                }
            };
            let predict = |x: &[f64]| -> usize {
                match split {
                    None => lc,
                    Some((f, thr)) => {
                        if x[f] <= thr {
                            lc
                        } else {
                            rc
                        }
                    }
                }
            };
            let err: f64 = (0..n).filter(|&i| predict(&dense[i]) != labels[i]).map(|i| weights[i]).sum();
            if err >= 1.0 - 1.0 / k {
                break;
            }
            if err < 1e-10 {
                stumps.push((split, lc, rc));
                alphas.push(((1.0 - 1e-10f64) / 1e-10).ln() + (k - 1.0).ln());
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (k - 1.0).ln();
            for i in 0..n {
                if predict(&dense[i]) != labels[i] {
                    weights[i] *= alpha.exp();
                }
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            stumps.push((split, lc, rc));
            alphas.push(alpha);
        }
        (stumps, alphas)
    }

    #[test]
    fn three_rounds_match_hand_tracked_recurrence() {
        let dense = vec![
            vec![1.0, 5.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![4.0, 1.0],
            vec![5.0, 2.0],
            vec![6.0, 7.0],
            vec![7.0, 3.0],
            vec![8.0, 8.0],
            vec![9.0, 2.0],
            vec![10.0, 6.0],
        ];
        let labels = vec![0, 0, 1, 0, 1, 1, 0, 1, 0, 1];
        let rows: Vec<FeatureVector> = dense.iter().map(|r| fv(r)).collect();

        let ada = train_adaboost(&rows, &labels, 2, 3).unwrap();
        let (oracle_stumps, oracle_alphas) = oracle_boost(&dense, &labels, 2, 3);

        assert_eq!(ada.stumps.len(), oracle_stumps.len());
        for (got, (split, lc, rc)) in ada.stumps.iter().zip(&oracle_stumps) {
            match (got.split, split) {
                (Some((f, t)), Some((of, ot))) => {
                    assert_eq!(f as usize, *of);
                    assert!((t - ot).abs() < 1e-12);
                }
                (None, None) => {}
                other => panic!("stump shape mismatch: {other:?}"),
            }
            assert_eq!(got.left_class as usize, *lc);
            assert_eq!(got.right_class as usize, *rc);
        }
        for (a, b) in ada.alphas.iter().zip(&oracle_alphas) {
            assert!((a - b).abs() < 1e-9);
        }

        // final weighted votes agree everywhere
        for x in &dense {
            let row = fv(x);
            let mut want = vec![0.0; 2];
            for ((split, lc, rc), &alpha) in oracle_stumps.iter().zip(&oracle_alphas) {
                let p = match split {
                    None => *lc,
                    Some((f, thr)) => {
                        if x[*f] <= *thr {
                            *lc
                        } else {
                            *rc
                        }
                    }
                };
                want[p] += alpha;
            }
            let total: f64 = oracle_alphas.iter().sum();
            let got = ada.predict_proba(&row);
            for c in 0..2 {
                assert!((got[c] - want[c] / total).abs() < 1e-9);
            }
        }
    }
}
