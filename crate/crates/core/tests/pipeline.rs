//! Cross-module integration: trained models driving the chat pipeline,
//! artifact round trips, failure collection, remote classification.

mod common;

use std::path::Path;

use chrono::{DateTime, Duration, FixedOffset};

use emoflow_core::analytics::{bucket_timeline, build_report, score_chat, ChatMessage};
use emoflow_core::encoder::remote::{RemoteClassifier, RemoteConfig};
use emoflow_core::encoder::{EncoderClassifier, EncoderConfig, EncoderWeights};
use emoflow_core::error::{Error, Result};
use emoflow_core::fixtures::{emotion_corpus, workday_chat};
use emoflow_core::fusion::{EmotionClassifier, EmotionDistribution};
use emoflow_core::lexicon::{load_lexicon, LoadMode, SentimentLexicon};
use emoflow_core::text::{train, ModelKind, ModelSpec, TrainOptions, TrainedModel};

use common::{six_labels, StubEndpoint};

fn data_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn sample_lexicon() -> SentimentLexicon {
    let (lexicon, _) = load_lexicon(&data_dir().join("emoji_sentiment_sample.csv"), LoadMode::Strict).unwrap();
    lexicon
}

fn small_model(kind: ModelKind) -> TrainedModel {
    let corpus = emotion_corpus(900, 17);
    train(
        &corpus,
        &ModelSpec::default_for(kind),
        &TrainOptions { min_count: 2, seed: 7 },
    )
    .unwrap()
}

#[test]
fn trained_model_drives_the_chat_pipeline() {
    let model = small_model(ModelKind::GaussianNb);
    let lexicon = sample_lexicon();
    let chat = workday_chat(40, 5);

    let outcome = score_chat(&chat, &model, Some(&lexicon)).unwrap();
    assert_eq!(outcome.scored.len(), 40);
    assert!(outcome.failures.is_empty());
    for (message, record) in chat.iter().zip(&outcome.scored) {
        assert_eq!(message.text, record.text, "order preserved");
        assert!(record.text_score <= record.fused_score + 1e-12);
        assert!(record.fused_score <= 2.0 * record.text_score + 1e-12);
    }

    let buckets = bucket_timeline(&outcome.scored, Duration::hours(1)).unwrap();
    let report = build_report(&outcome.scored, &buckets).unwrap();
    assert_eq!(report.total_messages, 40);
}

#[test]
fn model_artifacts_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let model = small_model(kind);
        let path = dir.path().join(format!("{kind}.json"));
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();

        // identical predictions on fresh text
        for text in ["happy that we shipped", "deadline is slipping badly", "junk zz9"] {
            assert_eq!(
                model.predict_proba(text).probs(),
                loaded.predict_proba(text).probs(),
                "{kind} prediction drift after reload"
            );
        }

        // saving the loaded model reproduces identical bytes
        let path2 = dir.path().join(format!("{kind}-resaved.json"));
        loaded.save(&path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap(),
            "{kind} artifact not byte-stable"
        );
    }
}

#[test]
fn training_is_deterministic_across_runs() {
    let corpus = emotion_corpus(600, 3);
    for kind in [ModelKind::RandomForest, ModelKind::Svm] {
        let opts = TrainOptions { min_count: 2, seed: 11 };
        let a = train(&corpus, &ModelSpec::default_for(kind), &opts).unwrap();
        let b = train(&corpus, &ModelSpec::default_for(kind), &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb) = (dir.path().join("a.json"), dir.path().join("b.json"));
        a.save(&pa).unwrap();
        b.save(&pb).unwrap();
        assert_eq!(
            std::fs::read(&pa).unwrap(),
            std::fs::read(&pb).unwrap(),
            "{kind} retrain differs"
        );
    }
}

/// Fails on texts containing a marker, for failure-collection tests.
struct FlakyClassifier {
    labels: Vec<String>,
}

impl EmotionClassifier for FlakyClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<EmotionDistribution> {
        if text.contains("poison") {
            return Err(Error::InvalidParameter("poisoned message".into()));
        }
        Ok(EmotionDistribution::uniform(self.labels.clone()))
    }
}

fn ts(s: &str) -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339(s).unwrap()
}

#[test]
fn per_message_failures_are_collected() {
    let clf = FlakyClassifier { labels: six_labels() };
    let mk = |text: &str, min: u32| ChatMessage {
        sender: "p".into(),
        timestamp: ts(&format!("2024-03-11T09:{min:02}:00+05:00")),
        text: text.into(),
    };
    let messages = vec![mk("fine", 0), mk("poison pill", 1), mk("also fine", 2)];
    let outcome = score_chat(&messages, &clf, None).unwrap();
    assert_eq!(outcome.scored.len(), 2);
    assert_eq!(outcome.failures.len(), 1);
    assert_eq!(outcome.failures[0].0, 1, "failure keeps its input index");
    let text = outcome.failures[0].1.to_string();
    assert!(text.contains("p") && text.contains("2024-03-11T09:01:00"), "identity attached: {text}");

    // all messages failing fails the run
    let all_bad = vec![mk("poison a", 0), mk("poison b", 1)];
    assert!(score_chat(&all_bad, &clf, None).is_err());
}

#[test]
fn remote_classifier_round_trips_through_http() {
    let endpoint = StubEndpoint::serve(&[
        ("anger", 0.1),
        ("fear", 0.1),
        ("joy", 0.5),
        ("love", 0.1),
        ("sadness", 0.1),
        ("surprise", 0.1),
    ]);
    let remote = RemoteClassifier::new(endpoint.url.clone(), six_labels(), RemoteConfig::default()).unwrap();
    let dist = remote.classify("any text").unwrap();
    assert_eq!(dist.prob("joy"), Some(0.5));

    // drives concurrent batch scoring too
    let chat = workday_chat(25, 2);
    let outcome = score_chat(&chat, &remote, None).unwrap();
    assert_eq!(outcome.scored.len(), 25);
    assert!(outcome.scored.iter().all(|m| m.dominant == "joy"));
}

#[test]
fn remote_label_mismatch_is_rejected() {
    let endpoint = StubEndpoint::serve(&[("yes", 0.5), ("no", 0.5)]);
    let remote = RemoteClassifier::new(endpoint.url.clone(), six_labels(), RemoteConfig::default()).unwrap();
    match remote.classify("text") {
        Err(Error::LabelSetMismatch { .. }) => {}
        other => panic!("expected label mismatch, got {other:?}"),
    }
}

#[test]
fn encoder_classifier_plugs_into_the_pipeline() {
    let config = EncoderConfig {
        vocab_size: 128,
        d_model: 8,
        n_heads: 2,
        d_k: 4,
        d_ff: 16,
        n_layers: 2,
        n_labels: 6,
        max_len: 16,
    };
    let weights = EncoderWeights::init_random(&config, 99).unwrap();
    let clf = EncoderClassifier::new(weights, config, six_labels()).unwrap();
    let chat = workday_chat(10, 8);
    let outcome = score_chat(&chat, &clf, Some(&sample_lexicon())).unwrap();
    assert_eq!(outcome.scored.len(), 10);
    for record in &outcome.scored {
        let sum: f64 = record.probs.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
    // deterministic: same weights, same chat, same records
    let again = score_chat(&chat, &clf, Some(&sample_lexicon())).unwrap();
    assert_eq!(
        serde_json::to_string(&outcome.scored).unwrap(),
        serde_json::to_string(&again.scored).unwrap()
    );
}
