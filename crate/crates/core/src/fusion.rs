//! Hybrid scoring: classifier distribution + emoji intensities → fused score.
//!
//! Per message the pipeline produces:
//!
//! - a probability distribution over the emotion label set (softmax of the
//!   classifier's logits, or the classifier's own distribution),
//! - the dominant emotion and its probability (the text score),
//! - the intensity factors of the message's emojis, and
//! - the fused score: text score times the mean intensity factor.
//!
//! The fused score is an intensity-weighted confidence, not a probability;
//! it lives in [text_score, 2 * text_score) and equals the text score for
//! emoji-free messages.

use std::collections::BTreeMap;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{self, SentimentLexicon};

/// Probability distribution over an ordered emotion label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

const PROB_SUM_TOLERANCE: f64 = 1e-9;

impl EmotionDistribution {
    /// Wraps raw probabilities, checking they form a distribution (each in
    /// [0, 1], summing to 1 within 1e-9).
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::ShapeMismatch {
                context: "emotion distribution".into(),
                expected: format!("{} probabilities", labels.len()),
                actual: format!("{}", probs.len()),
            });
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < -PROB_SUM_TOLERANCE || *p > 1.0 + PROB_SUM_TOLERANCE)
            || (sum - 1.0).abs() > PROB_SUM_TOLERANCE
        {
            return Err(Error::UnnormalizedDistribution { sum, tolerance: PROB_SUM_TOLERANCE });
        }
        Ok(Self { labels, probs })
    }

    /// Uniform distribution over `labels`.
    pub fn uniform(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, probs: vec![1.0 / n as f64; n] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }

    /// Probabilities keyed by label in lexicographic order; the diff-stable
    /// form used in serialized records.
    pub fn as_map(&self) -> BTreeMap<String, f64> {
        self.labels.iter().cloned().zip(self.probs.iter().copied()).collect()
    }
}

/// Numerically stable softmax: logits are shifted by their maximum before
/// exponentiation, so the output is invariant (to rounding) under adding a
/// constant to every logit.
pub fn softmax(labels: &[String], logits: &[f64]) -> Result<EmotionDistribution> {
    if labels.len() != logits.len() {
        return Err(Error::ShapeMismatch {
            context: "softmax".into(),
            expected: format!("{} logits", labels.len()),
            actual: format!("{}", logits.len()),
        });
    }
    if let Some(i) = logits.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteLogit(i));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    Ok(EmotionDistribution {
        labels: labels.to_vec(),
        probs: exp.into_iter().map(|e| e / sum).collect(),
    })
}

/// Argmax label and its probability. Ties break to the lexicographically
/// smallest label name.
pub fn dominant_emotion(dist: &EmotionDistribution) -> (&str, f64) {
    let mut best = 0;
    for i in 1..dist.probs.len() {
        let better = dist.probs[i] > dist.probs[best]
            || (dist.probs[i] == dist.probs[best] && dist.labels[i] < dist.labels[best]);
        if better {
            best = i;
        }
    }
    (&dist.labels[best], dist.probs[best])
}

/// Fuses the text score with emoji intensity factors:
/// `text_score * mean(intensities)`, or `text_score` alone when the message
/// has no (known) emojis — the continuous limit of "no emoji evidence".
pub fn fuse(text_score: f64, intensities: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&text_score) || !text_score.is_finite() {
        return Err(Error::TextScoreOutOfRange(text_score));
    }
    for &phi in intensities {
        if !(1.0..2.0).contains(&phi) {
            return Err(Error::IntensityOutOfRange(phi));
        }
    }
    if intensities.is_empty() {
        return Ok(text_score);
    }
    let mean = intensities.iter().sum::<f64>() / intensities.len() as f64;
    Ok(text_score * mean)
}

/// Anything that can map message text to an emotion distribution: a trained
/// classical model, the toy encoder, a remote service, or a test stub.
pub trait EmotionClassifier: Send + Sync {
    fn labels(&self) -> &[String];
    fn classify(&self, text: &str) -> Result<EmotionDistribution>;
}

/// Always returns one fixed distribution. Used for tests and for driving the
/// analytics pipeline without a trained model.
#[derive(Debug, Clone)]
pub struct FixedClassifier {
    dist: EmotionDistribution,
}

impl FixedClassifier {
    pub fn new(dist: EmotionDistribution) -> Self {
        Self { dist }
    }
}

impl EmotionClassifier for FixedClassifier {
    fn labels(&self) -> &[String] {
        self.dist.labels()
    }

    fn classify(&self, _text: &str) -> Result<EmotionDistribution> {
        Ok(self.dist.clone())
    }
}

/// A chat message with the full scoring result attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredMessage {
    pub text: String,
    pub sender: String,
    pub timestamp: DateTime<FixedOffset>,
    /// Dominant emotion: argmax of `probs`.
    pub dominant: String,
    /// Probability of the dominant emotion.
    pub text_score: f64,
    /// Intensity factor of each known emoji, in order of appearance.
    pub intensities: Vec<f64>,
    /// `text_score` scaled by the mean intensity factor.
    pub fused_score: f64,
    /// Full distribution, lexicographic label order.
    pub probs: BTreeMap<String, f64>,
}

/// Runs the hybrid pipeline on one message.
///
/// Emojis are stripped from the text before classification so the emoji
/// signal enters exactly once, through the intensity factors.
pub fn score_message(
    sender: &str,
    timestamp: DateTime<FixedOffset>,
    text: &str,
    classifier: &dyn EmotionClassifier,
    lexicon: Option<&SentimentLexicon>,
) -> Result<ScoredMessage> {
    let stripped = lexicon::strip_emojis(text);
    let dist = classifier.classify(&stripped).map_err(|e| Error::MessageFailed {
        sender: sender.to_string(),
        timestamp: timestamp.to_rfc3339(),
        source: Box::new(e),
    })?;
    let (dominant, text_score) = dominant_emotion(&dist);
    let dominant = dominant.to_string();
    let intensities = match lexicon {
        Some(lex) => lexicon::message_intensities(text, lex),
        None => Vec::new(),
    };
    let fused_score = fuse(text_score, &intensities)?;
    Ok(ScoredMessage {
        text: text.to_string(),
        sender: sender.to_string(),
        timestamp,
        dominant,
        text_score,
        intensities,
        fused_score,
        probs: dist.as_map(),
    })
}
