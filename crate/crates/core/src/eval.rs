//! Train/test splitting, multiclass metrics and side-by-side model
//! comparison.
//!
//! Both macro and weighted averaging are always reported; zero-denominator
//! per-class precision/recall are defined as 0 and counted.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::text::{train, LabeledCorpus, ModelSpec, TrainOptions};

/// Label-by-label count grid: rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub label_set: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(label_set: Vec<String>) -> Self {
        let n = label_set.len();
        Self { label_set, counts: vec![vec![0; n]; n] }
    }

    pub fn from_counts(label_set: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let n = label_set.len();
        if counts.len() != n || counts.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch {
                context: "confusion matrix".into(),
                expected: format!("{n}x{n}"),
                actual: format!("{}x{}", counts.len(), counts.first().map_or(0, Vec::len)),
            });
        }
        Ok(Self { label_set, counts })
    }

    pub fn record(&mut self, true_class: usize, predicted_class: usize) {
        self.counts[true_class][predicted_class] += 1;
    }

    pub fn count(&self, true_class: usize, predicted_class: usize) -> usize {
        self.counts[true_class][predicted_class]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.label_set.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Macro,
    Weighted,
}

/// Accuracy plus averaged precision/recall/F1. `zero_denominators` counts
/// per-class precision/recall terms that hit an empty denominator and were
/// defined as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub zero_denominators: usize,
}

/// Multiclass metrics from a confusion matrix under the chosen averaging.
pub fn metrics(cm: &ConfusionMatrix, averaging: Averaging) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidParameter("empty confusion matrix".into()));
    }
    let n = cm.label_set.len();
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut weight_sum = 0.0;
    let mut zero_denominators = 0usize;

    for c in 0..n {
        let tp = cm.counts[c][c] as f64;
        let row_sum: f64 = cm.counts[c].iter().sum::<usize>() as f64;
        let col_sum: f64 = (0..n).map(|r| cm.counts[r][c]).sum::<usize>() as f64;
        let precision = if col_sum > 0.0 {
            tp / col_sum
        } else {
            zero_denominators += 1;
            0.0
        };
        let recall = if row_sum > 0.0 {
            tp / row_sum
        } else {
            zero_denominators += 1;
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let weight = match averaging {
            Averaging::Macro => 1.0,
            Averaging::Weighted => row_sum,
        };
        precision_sum += weight * precision;
        recall_sum += weight * recall;
        f1_sum += weight * f1;
        weight_sum += weight;
    }

    Ok(Metrics {
        accuracy: cm.trace() as f64 / total as f64,
        precision: precision_sum / weight_sum,
        recall: recall_sum / weight_sum,
        f1: f1_sum / weight_sum,
        zero_denominators,
    })
}

/// Stratified train/test split: per-class proportions are preserved (test
/// share rounded per class, clamped so both sides keep at least one sample),
/// deterministic for a seed, and an exact partition of the corpus.
pub fn split(
    corpus: &LabeledCorpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "test_fraction {test_fraction} must be in (0, 1)"
        )));
    }
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (class, label) in corpus.label_set.iter().enumerate() {
        let mut members: Vec<usize> = corpus
            .documents
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| corpus.label_index(l) == Some(class))
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.clone(),
                count: members.len(),
                action: "stratify the split".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(class as u64));
        members.shuffle(&mut rng);
        let want = (members.len() as f64 * test_fraction).round() as usize;
        let take = want.clamp(1, members.len() - 1);
        test_idx.extend_from_slice(&members[..take]);
        train_idx.extend_from_slice(&members[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| LabeledCorpus {
        documents: idx.iter().map(|&i| corpus.documents[i].clone()).collect(),
        label_set: corpus.label_set.clone(),
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// One comparison row: evaluated metrics, or the failure reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ModelOutcome {
    Evaluated {
        macro_avg: Metrics,
        weighted_avg: Metrics,
        train_seconds: f64,
    },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub spec: ModelSpec,
    pub outcome: ModelOutcome,
}

/// Per-model metric table over one shared stratified split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub rows: Vec<ModelRow>,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub test_fraction: f64,
    pub seed: u64,
    pub min_count: usize,
    pub dataset: String,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
            min_count: 1,
            dataset: String::new(),
        }
    }
}

/// Trains and evaluates every spec on one shared split. Rows keep the given
/// order; per-model failures become [`ModelOutcome::Failed`] rows.
pub fn compare_models(
    corpus: &LabeledCorpus,
    specs: &[ModelSpec],
    opts: &CompareOptions,
) -> Result<EvalReport> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("need at least one model spec".into()));
    }
    let (train_corpus, test_corpus) = split(corpus, opts.test_fraction, opts.seed)?;
    let test_labels = test_corpus.label_ids();
    let train_opts = TrainOptions { min_count: opts.min_count, seed: opts.seed };

    let rows: Vec<ModelRow> = specs
        .iter()
        .map(|spec| {
            let name = spec.kind().name().to_string();
            let started = std::time::Instant::now();
            let outcome = match train(&train_corpus, spec, &train_opts) {
                Err(e) => ModelOutcome::Failed { reason: e.to_string() },
                Ok(model) => {
                    let train_seconds = started.elapsed().as_secs_f64();
                    let predicted = par::map_slice(&test_corpus.documents, |(text, _)| {
                        model.predict(text)
                    });
                    let mut cm = ConfusionMatrix::new(corpus.label_set.clone());
                    for (pred, &true_class) in predicted.iter().zip(&test_labels) {
                        let pred_class = corpus
                            .label_index(pred)
                            .expect("model predicts labels from the corpus label set");
                        cm.record(true_class, pred_class);
                    }
                    match (metrics(&cm, Averaging::Macro), metrics(&cm, Averaging::Weighted)) {
                        (Ok(macro_avg), Ok(weighted_avg)) => ModelOutcome::Evaluated {
                            macro_avg,
                            weighted_avg,
                            train_seconds,
                        },
                        (Err(e), _) | (_, Err(e)) => ModelOutcome::Failed { reason: e.to_string() },
                    }
                }
            };
            ModelRow { name, spec: spec.clone(), outcome }
        })
        .collect();

    Ok(EvalReport {
        dataset: opts.dataset.clone(),
        seed: opts.seed,
        test_fraction: opts.test_fraction,
        train_size: train_corpus.documents.len(),
        test_size: test_corpus.documents.len(),
        rows,
    })
}

impl EvalReport {
    /// CSV table; failed models are absent rows (their reasons live in the
    /// JSON/text renderings).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "model,accuracy,precision_macro,recall_macro,f1_macro,precision_weighted,recall_weighted,f1_weighted\n",
        );
        for row in &self.rows {
            if let ModelOutcome::Evaluated { macro_avg, weighted_avg, .. } = &row.outcome {
                let _ = writeln!(
                    out,
                    "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    row.name,
                    macro_avg.accuracy,
                    macro_avg.precision,
                    macro_avg.recall,
                    macro_avg.f1,
                    weighted_avg.precision,
                    weighted_avg.recall,
                    weighted_avg.f1,
                );
            }
        }
        out
    }

    /// Human-readable aligned table, including failures.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset: {}  (train {}, test {}, seed {})",
            if self.dataset.is_empty() { "<unnamed>" } else { &self.dataset },
            self.train_size,
            self.test_size,
            self.seed
        );
        let _ = writeln!(
            out,
            "{:<14} {:>9} {:>10} {:>8} {:>8} {:>11} {:>9} {:>9}",
            "model", "accuracy", "prec(M)", "rec(M)", "f1(M)", "prec(W)", "rec(W)", "f1(W)"
        );
        for row in &self.rows {
            match &row.outcome {
                ModelOutcome::Evaluated { macro_avg, weighted_avg, .. } => {
                    let _ = writeln!(
                        out,
                        "{:<14} {:>9.4} {:>10.4} {:>8.4} {:>8.4} {:>11.4} {:>9.4} {:>9.4}",
                        row.name,
                        macro_avg.accuracy,
                        macro_avg.precision,
                        macro_avg.recall,
                        macro_avg.f1,
                        weighted_avg.precision,
                        weighted_avg.recall,
                        weighted_avg.f1,
                    );
                }
                ModelOutcome::Failed { reason } => {
                    let _ = writeln!(out, "{:<14} FAILED: {}", row.name, reason);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::ModelKind;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_diagonal_scores_one() {
        let cm = ConfusionMatrix::from_counts(
            labels(&["a", "b", "c"]),
            vec![vec![4, 0, 0], vec![0, 3, 0], vec![0, 0, 5]],
        )
        .unwrap();
        for avg in [Averaging::Macro, Averaging::Weighted] {
            let m = metrics(&cm, avg).unwrap();
            assert_eq!(m.accuracy, 1.0);
            assert_eq!(m.precision, 1.0);
            assert_eq!(m.recall, 1.0);
            assert_eq!(m.f1, 1.0);
            assert_eq!(m.zero_denominators, 0);
        }
    }

    #[test]
    fn symmetric_binary_matrix() {
        let cm = ConfusionMatrix::from_counts(labels(&["n", "p"]), vec![vec![5, 5], vec![5, 5]]).unwrap();
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert!((m.accuracy - 0.5).abs() < 1e-15);
        assert!((m.precision - 0.5).abs() < 1e-15);
        assert!((m.recall - 0.5).abs() < 1e-15);
        assert!((m.f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_class_fixture_matches_hand_computation() {
        // rows = true, cols = predicted
        let cm = ConfusionMatrix::from_counts(
            labels(&["a", "b", "c"]),
            vec![vec![2, 1, 0], vec![0, 3, 0], vec![1, 0, 3]],
        )
        .unwrap();
        // hand-computed per class:
        //   tp = (2, 3, 3); fp = (1, 1, 0); fn = (1, 0, 1)
        //   precision = (2/3, 3/4, 1); recall = (2/3, 1, 3/4)
        //   f1 = (2/3, 6/7, 6/7)
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert!((m.accuracy - 0.8).abs() < 1e-9);
        assert!((m.precision - (2.0 / 3.0 + 0.75 + 1.0) / 3.0).abs() < 1e-9);
        assert!((m.recall - (2.0 / 3.0 + 1.0 + 0.75) / 3.0).abs() < 1e-9);
        assert!((m.f1 - (2.0 / 3.0 + 6.0 / 7.0 + 6.0 / 7.0) / 3.0).abs() < 1e-9);

        let w = metrics(&cm, Averaging::Weighted).unwrap();
        assert!((w.precision - (3.0 * (2.0 / 3.0) + 3.0 * 0.75 + 4.0 * 1.0) / 10.0).abs() < 1e-9);
        assert!((w.recall - 0.8).abs() < 1e-9, "weighted recall equals accuracy");
        assert!((w.f1 - (3.0 * (2.0 / 3.0) + 3.0 * (6.0 / 7.0) + 4.0 * (6.0 / 7.0)) / 10.0).abs() < 1e-9);
    }

    #[test]
    fn metrics_invariant_under_label_permutation() {
        let counts = vec![vec![5, 2, 1], vec![0, 7, 3], vec![2, 2, 8]];
        let cm = ConfusionMatrix::from_counts(labels(&["a", "b", "c"]), counts.clone()).unwrap();
        // permute (a,b,c) -> (c,a,b)
        let perm = [2usize, 0, 1];
        let mut permuted = vec![vec![0usize; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                permuted[perm[i]][perm[j]] = counts[i][j];
            }
        }
        let cm2 = ConfusionMatrix::from_counts(labels(&["c", "a", "b"]), permuted).unwrap();
        for avg in [Averaging::Macro, Averaging::Weighted] {
            let m1 = metrics(&cm, avg).unwrap();
            let m2 = metrics(&cm2, avg).unwrap();
            assert!((m1.accuracy - m2.accuracy).abs() < 1e-12);
            assert!((m1.precision - m2.precision).abs() < 1e-12);
            assert!((m1.recall - m2.recall).abs() < 1e-12);
            assert!((m1.f1 - m2.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_denominator_counted() {
        // nothing predicted as class b, nothing truly class c
        let cm = ConfusionMatrix::from_counts(
            labels(&["a", "b", "c"]),
            vec![vec![3, 0, 1], vec![2, 0, 0], vec![0, 0, 0]],
        )
        .unwrap();
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert!(m.zero_denominators >= 2);
        assert!(m.precision >= 0.0 && m.f1 <= 1.0);
    }

    fn balanced_corpus(per_class: usize, classes: &[&str]) -> LabeledCorpus {
        let mut docs = Vec::new();
        for (ci, class) in classes.iter().enumerate() {
            for i in 0..per_class {
                docs.push((format!("{class} word{ci} tok{i} filler"), class.to_string()));
            }
        }
        LabeledCorpus::from_documents(docs).unwrap()
    }

    #[test]
    fn split_is_stratified_and_exact() {
        let corpus = balanced_corpus(100, &["a", "b", "c", "d", "e", "f"]);
        let (train, test) = split(&corpus, 0.25, 42).unwrap();
        assert_eq!(train.documents.len() + test.documents.len(), 600);
        for class in &corpus.label_set {
            let test_count = test.documents.iter().filter(|(_, l)| l == class).count();
            assert_eq!(test_count, 25, "class {class}");
        }
        // partition: no document in both
        let train_set: std::collections::HashSet<&str> =
            train.documents.iter().map(|(t, _)| t.as_str()).collect();
        assert!(test.documents.iter().all(|(t, _)| !train_set.contains(t.as_str())));
    }

    #[test]
    fn split_proportions_within_one_sample() {
        let mut docs = Vec::new();
        for i in 0..60 {
            docs.push((format!("x{i}"), "a".to_string()));
        }
        for i in 0..40 {
            docs.push((format!("y{i}"), "b".to_string()));
        }
        let corpus = LabeledCorpus::from_documents(docs).unwrap();
        let (_, test) = split(&corpus, 0.2, 7).unwrap();
        let a = test.documents.iter().filter(|(_, l)| l == "a").count();
        let b = test.documents.iter().filter(|(_, l)| l == "b").count();
        assert!((a as i64 - 12).abs() <= 1);
        assert!((b as i64 - 8).abs() <= 1);
    }

    #[test]
    fn split_deterministic_and_seed_sensitive() {
        let corpus = balanced_corpus(20, &["a", "b"]);
        let (t1, s1) = split(&corpus, 0.3, 5).unwrap();
        let (t2, s2) = split(&corpus, 0.3, 5).unwrap();
        assert_eq!(t1.documents, t2.documents);
        assert_eq!(s1.documents, s2.documents);
        let (_, s3) = split(&corpus, 0.3, 6).unwrap();
        assert_ne!(s1.documents, s3.documents);
    }

    #[test]
    fn split_rejects_tiny_class() {
        let docs = vec![
            ("a".to_string(), "x".to_string()),
            ("b".to_string(), "y".to_string()),
            ("c".to_string(), "y".to_string()),
        ];
        let corpus = LabeledCorpus::from_documents(docs).unwrap();
        assert!(matches!(split(&corpus, 0.5, 1), Err(Error::ClassTooSmall { .. })));
    }

    #[test]
    fn majority_class_analytic_example() {
        // 90/10 skew; decision tree on a constant corpus predicts the
        // majority class everywhere → accuracy 0.9, macro recall 0.5.
        let mut docs = Vec::new();
        for i in 0..90 {
            docs.push((format!("same text {}", i % 3), "big".to_string()));
        }
        for i in 0..10 {
            docs.push((format!("same text {}", i % 3), "small".to_string()));
        }
        let corpus = LabeledCorpus::from_documents(docs).unwrap();
        let spec = ModelSpec::DecisionTree {
            criterion: crate::text::Criterion::Gini,
            max_depth: Some(0),
            min_leaf: 1,
        };
        let report = compare_models(
            &corpus,
            &[spec],
            &CompareOptions { test_fraction: 0.2, seed: 42, min_count: 1, dataset: "skew".into() },
        )
        .unwrap();
        match &report.rows[0].outcome {
            ModelOutcome::Evaluated { macro_avg, .. } => {
                assert!((macro_avg.accuracy - 0.9).abs() < 1e-12);
                assert!((macro_avg.recall - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_specs_give_identical_rows() {
        let corpus = balanced_corpus(30, &["a", "b", "c"]);
        let spec = ModelSpec::default_for(ModelKind::GaussianNb);
        let report = compare_models(
            &corpus,
            &[spec.clone(), spec],
            &CompareOptions::default(),
        )
        .unwrap();
        match (&report.rows[0].outcome, &report.rows[1].outcome) {
            (
                ModelOutcome::Evaluated { macro_avg: a, weighted_avg: wa, .. },
                ModelOutcome::Evaluated { macro_avg: b, weighted_avg: wb, .. },
            ) => {
                assert_eq!((a.accuracy, a.precision, a.recall, a.f1), (b.accuracy, b.precision, b.recall, b.f1));
                assert_eq!((wa.precision, wa.f1), (wb.precision, wb.f1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_omits_failed_rows() {
        let report = EvalReport {
            dataset: "x".into(),
            seed: 1,
            test_fraction: 0.2,
            train_size: 8,
            test_size: 2,
            rows: vec![ModelRow {
                name: "knn".into(),
                spec: ModelSpec::Knn { k: 99, p: 2.0 },
                outcome: ModelOutcome::Failed { reason: "k out of range".into() },
            }],
        };
        let csv = report.to_csv_string();
        assert_eq!(csv.lines().count(), 1, "header only");
        assert!(report.to_text_table().contains("FAILED"));
    }
}
