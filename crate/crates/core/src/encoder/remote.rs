//! Remote-inference adapter: lets a full pre-trained model served elsewhere
//! act as the text classifier.
//!
//! Protocol: `POST {endpoint}/classify` with body `{"text": <string>}`; the
//! reply is `{"probs": {<label>: <real>, ...}}` carrying exactly the
//! configured label set. Replies off normalization by more than 1e-3 are
//! rejected; smaller drift is renormalized.

use std::collections::HashMap;
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fusion::{EmotionClassifier, EmotionDistribution};

pub const REMOTE_SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub timeout: Duration,
    /// Additional attempts after the first on transport failure.
    pub retries: u32,
    /// Pause between attempts.
    pub backoff: Duration,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(10),
            retries: 2,
            backoff: Duration::from_millis(50),
        }
    }
}

pub struct RemoteClassifier {
    endpoint: String,
    labels: Vec<String>,
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

#[derive(Debug, Deserialize)]
struct ClassifyReply {
    probs: HashMap<String, f64>,
}

impl RemoteClassifier {
    pub fn new(endpoint: impl Into<String>, labels: Vec<String>, config: RemoteConfig) -> Result<Self> {
        let endpoint = endpoint.into().trim_end_matches('/').to_string();
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Remote { attempts: 0, reason: e.to_string() })?;
        Ok(Self { endpoint, labels, config, client })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn request(&self, text: &str) -> Result<ClassifyReply> {
        let url = format!("{}/classify", self.endpoint);
        let attempts = self.config.retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff);
            }
            let sent = self
                .client
                .post(&url)
                .json(&serde_json::json!({ "text": text }))
                .send();
            match sent {
                Err(e) => last_error = e.to_string(),
                Ok(resp) => {
                    if !resp.status().is_success() {
                        last_error = format!("HTTP {}", resp.status());
                        continue;
                    }
                    return resp
                        .json::<ClassifyReply>()
                        .map_err(|e| Error::Remote { attempts: attempt + 1, reason: format!("malformed reply: {e}") });
                }
            }
        }
        Err(Error::Remote { attempts, reason: last_error })
    }

    fn validate(&self, reply: ClassifyReply) -> Result<EmotionDistribution> {
        let mut got: Vec<String> = reply.probs.keys().cloned().collect();
        got.sort();
        let mut want = self.labels.clone();
        want.sort();
        if got != want {
            return Err(Error::LabelSetMismatch { expected: want, actual: got });
        }
        let mut probs = Vec::with_capacity(self.labels.len());
        for label in &self.labels {
            let p = reply.probs[label];
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Remote {
                    attempts: 1,
                    reason: format!("probability for `{label}` is {p}"),
                });
            }
            probs.push(p);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > REMOTE_SUM_TOLERANCE {
            return Err(Error::UnnormalizedDistribution { sum, tolerance: REMOTE_SUM_TOLERANCE });
        }
        // renormalize real drift; leave sums already within the
        // distribution tolerance untouched so well-behaved endpoints pass
        // probabilities through bit-exactly
        if (sum - 1.0).abs() > 1e-9 {
            for p in &mut probs {
                *p /= sum;
            }
        }
        EmotionDistribution::new(self.labels.clone(), probs)
    }
}

impl EmotionClassifier for RemoteClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<EmotionDistribution> {
        let reply = self.request(text)?;
        self.validate(reply)
    }
}
