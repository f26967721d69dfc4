//! Parallel vs sequential throughput on the data-parallel hot paths: forest
//! training, KNN batch prediction and chat scoring.
//!
//! With the default `parallel` feature the work runs in rayon; the `seq1`
//! variants install a one-thread pool around the same call, which is the
//! in-binary sequential baseline. Building the bench with
//! `--no-default-features` measures the rayon-free code path instead (the
//! `par` variants then simply coincide with it).

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use emoflow_core::analytics::score_chat;
use emoflow_core::fixtures::{emotion_corpus, workday_chat, EMOTION_LABELS};
use emoflow_core::fusion::{EmotionDistribution, FixedClassifier};
use emoflow_core::text::{featurize, forest::train_random_forest, knn::train_knn};

fn stub_classifier() -> FixedClassifier {
    let labels: Vec<String> = EMOTION_LABELS.iter().map(|s| s.to_string()).collect();
    let mut probs = vec![0.06; 6];
    probs[2] = 0.7;
    FixedClassifier::new(EmotionDistribution::new(labels, probs).unwrap())
}

#[cfg(feature = "parallel")]
fn run_with_threads<T>(threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads<T>(_threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    f()
}

fn bench_forest(c: &mut Criterion) {
    let corpus = emotion_corpus(2000, 42);
    let (_, rows) = featurize(&corpus, 2).unwrap();
    let labels = corpus.label_ids();

    let mut group = c.benchmark_group("forest_train_2k");
    group.sample_size(10);
    for (name, threads) in [("seq1", 1usize), ("par", 0usize)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let run = || {
                    train_random_forest(black_box(&rows), black_box(&labels), 6, 20, None, 1, true, 42)
                        .unwrap()
                };
                if threads == 1 {
                    run_with_threads(1, run)
                } else {
                    run()
                }
            })
        });
    }
    group.finish();
}

fn bench_knn_batch(c: &mut Criterion) {
    let corpus = emotion_corpus(3000, 1);
    let (_, rows) = featurize(&corpus, 2).unwrap();
    let labels = corpus.label_ids();
    let knn = train_knn(&rows[..2500], &labels[..2500], 6, 15, 2.0).unwrap();
    let queries = &rows[2500..];

    let mut group = c.benchmark_group("knn_predict_500");
    group.sample_size(10);
    group.bench_function("seq1", |b| {
        b.iter(|| {
            run_with_threads(1, || {
                #[cfg(feature = "parallel")]
                {
                    use rayon::prelude::*;
                    queries.par_iter().map(|q| knn.predict_proba(q)).collect::<Vec<_>>()
                }
                #[cfg(not(feature = "parallel"))]
                {
                    queries.iter().map(|q| knn.predict_proba(q)).collect::<Vec<_>>()
                }
            })
        })
    });
    group.bench_function("par", |b| {
        b.iter(|| {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                queries.par_iter().map(|q| knn.predict_proba(q)).collect::<Vec<_>>()
            }
            #[cfg(not(feature = "parallel"))]
            {
                queries.iter().map(|q| knn.predict_proba(q)).collect::<Vec<_>>()
            }
        })
    });
    group.finish();
}

fn bench_chat_scoring(c: &mut Criterion) {
    let chat = workday_chat(2000, 3);
    let classifier = stub_classifier();

    let mut group = c.benchmark_group("score_chat_2k");
    group.sample_size(10);
    for (name, threads) in [("seq1", 1usize), ("par", 0usize)] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || chat.clone(),
                |chat| {
                    let run = || score_chat(black_box(&chat), &classifier, None).unwrap();
                    if threads == 1 {
                        run_with_threads(1, run)
                    } else {
                        run()
                    }
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forest, bench_knn_batch, bench_chat_scoring);
criterion_main!(benches);
