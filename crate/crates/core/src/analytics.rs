//! Chat ingestion, batch scoring and emotional-dynamics aggregation.
//!
//! A chat log (JSON Lines or CSV with `sender`, `timestamp`, `text`) is
//! scored message by message, then aggregated into wall-clock time buckets:
//! per-emotion summed and mean fused scores, dominant-emotion counts,
//! per-sender profiles and per-emotion score distributions. A message
//! contributes its fused score only to its dominant emotion's series; the
//! full distribution stays available in the per-message records.
//!
//! Timestamps keep their source offset and buckets align to local wall-clock
//! multiples of the bucket width (hours for the default 1 h width).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, FixedOffset, NaiveDateTime, TimeZone, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{score_message, EmotionClassifier, ScoredMessage};
use crate::lexicon::SentimentLexicon;
use crate::par;

/// One chat message as ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub sender: String,
    pub timestamp: DateTime<FixedOffset>,
    pub text: String,
}

/// Input format for [`load_chat`]; `Auto` picks by file extension
/// (`.csv` vs anything else = JSON Lines).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChatFormat {
    JsonLines,
    Csv,
    Auto,
}

fn parse_timestamp(raw: &str) -> std::result::Result<DateTime<FixedOffset>, String> {
    DateTime::parse_from_rfc3339(raw.trim()).map_err(|e| format!("bad timestamp `{raw}`: {e}"))
}

/// Loads and validates a chat log, sorted by timestamp (stable, so file
/// order is kept among equal timestamps).
pub fn load_chat(path: &Path, format: ChatFormat) -> Result<Vec<ChatMessage>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.display().to_string()));
    }
    let format = match format {
        ChatFormat::Auto => {
            if path.extension().and_then(|e| e.to_str()) == Some("csv") {
                ChatFormat::Csv
            } else {
                ChatFormat::JsonLines
            }
        }
        other => other,
    };
    let file_label = path.display().to_string();
    let mut messages = match format {
        ChatFormat::JsonLines => load_chat_jsonl(path, &file_label)?,
        ChatFormat::Csv => load_chat_csv(path, &file_label)?,
        ChatFormat::Auto => unreachable!(),
    };
    messages.sort_by_key(|m| m.timestamp);
    Ok(messages)
}

fn load_chat_jsonl(path: &Path, file_label: &str) -> Result<Vec<ChatMessage>> {
    #[derive(Deserialize)]
    struct RawMessage {
        sender: String,
        timestamp: String,
        text: String,
    }
    let contents = std::fs::read_to_string(path)?;
    let mut messages = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| Error::MalformedRow {
            file: file_label.to_string(),
            line: line_no,
            reason,
        };
        let raw: RawMessage = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        if raw.sender.trim().is_empty() {
            return Err(fail("empty sender".into()));
        }
        let timestamp = parse_timestamp(&raw.timestamp).map_err(fail)?;
        messages.push(ChatMessage { sender: raw.sender, timestamp, text: raw.text });
    }
    Ok(messages)
}

fn load_chat_csv(path: &Path, file_label: &str) -> Result<Vec<ChatMessage>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (si, ti, xi) = match (col("sender"), col("timestamp"), col("text")) {
        (Some(s), Some(t), Some(x)) => (s, t, x),
        _ => {
            return Err(Error::MalformedRow {
                file: file_label.to_string(),
                line: 1,
                reason: "header must contain sender, timestamp, text".into(),
            })
        }
    };
    let mut messages = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2;
        let fail = |reason: String| Error::MalformedRow {
            file: file_label.to_string(),
            line,
            reason,
        };
        let record = record.map_err(|e| fail(e.to_string()))?;
        let field = |idx: usize, what: &str| {
            record
                .get(idx)
                .map(str::to_owned)
                .ok_or_else(|| fail(format!("missing {what}")))
        };
        let sender = field(si, "sender")?;
        if sender.trim().is_empty() {
            return Err(fail("empty sender".into()));
        }
        let timestamp = parse_timestamp(&field(ti, "timestamp")?).map_err(fail)?;
        messages.push(ChatMessage { sender, timestamp, text: field(xi, "text")? });
    }
    Ok(messages)
}

/// Batch scoring result: per-message records in input order plus any
/// per-message failures (input index and error).
#[derive(Debug)]
pub struct ScoreOutcome {
    pub scored: Vec<ScoredMessage>,
    pub failures: Vec<(usize, Error)>,
}

/// Scores every message. Individual classifier failures are collected; the
/// call only fails when every message failed.
pub fn score_chat(
    messages: &[ChatMessage],
    classifier: &dyn EmotionClassifier,
    lexicon: Option<&SentimentLexicon>,
) -> Result<ScoreOutcome> {
    if messages.is_empty() {
        return Ok(ScoreOutcome { scored: Vec::new(), failures: Vec::new() });
    }
    let results = par::map_slice(messages, |m| {
        score_message(&m.sender, m.timestamp, &m.text, classifier, lexicon)
    });
    let mut scored = Vec::with_capacity(messages.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => scored.push(s),
            Err(e) => failures.push((i, e)),
        }
    }
    if scored.is_empty() {
        let (_, first) = failures.remove(0);
        return Err(first);
    }
    Ok(ScoreOutcome { scored, failures })
}

/// Per-emotion aggregate within one bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmotionAggregate {
    /// Summed fused score of messages whose dominant emotion this is.
    pub sum: f64,
    /// Mean fused score (0 when the bucket holds no such message).
    pub mean: f64,
    /// Message count (the dominant-emotion histogram entry).
    pub count: usize,
}

/// One wall-clock bucket `[bucket_start, bucket_start + width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineBucket {
    pub bucket_start: DateTime<FixedOffset>,
    pub per_emotion: BTreeMap<String, EmotionAggregate>,
}

impl TimelineBucket {
    pub fn message_count(&self) -> usize {
        self.per_emotion.values().map(|a| a.count).sum()
    }

    pub fn total_score(&self) -> f64 {
        self.per_emotion.values().map(|a| a.sum).sum()
    }
}

fn floor_to_bucket(ts: DateTime<FixedOffset>, width_secs: i64) -> NaiveDateTime {
    let local = ts.naive_local();
    let secs_of_day = i64::from(local.time().num_seconds_from_midnight());
    let floored = secs_of_day - secs_of_day % width_secs;
    local.date().and_hms_opt(0, 0, 0).expect("midnight exists") + Duration::seconds(floored)
}

/// Buckets scored messages into wall-clock-aligned windows of `width`.
/// Empty buckets inside the observed span are emitted with zeros. The label
/// set is taken from the messages' distributions; the width must divide a
/// day so bucket starts are plain wall-clock multiples.
pub fn bucket_timeline(scored: &[ScoredMessage], width: Duration) -> Result<Vec<TimelineBucket>> {
    let width_secs = width.num_seconds();
    if width_secs <= 0 {
        return Err(Error::InvalidParameter("bucket width must be positive".into()));
    }
    if 86_400 % width_secs != 0 {
        return Err(Error::InvalidParameter(format!(
            "bucket width {width_secs}s must divide a day"
        )));
    }
    if scored.is_empty() {
        return Ok(Vec::new());
    }
    let labels: Vec<String> = scored[0].probs.keys().cloned().collect();
    let offset = *scored[0].timestamp.offset();

    let mut buckets: BTreeMap<NaiveDateTime, BTreeMap<String, EmotionAggregate>> = BTreeMap::new();
    for m in scored {
        let key = floor_to_bucket(m.timestamp, width_secs);
        let bucket = buckets.entry(key).or_insert_with(|| {
            labels
                .iter()
                .map(|l| (l.clone(), EmotionAggregate::default()))
                .collect()
        });
        let agg = bucket.entry(m.dominant.clone()).or_default();
        agg.sum += m.fused_score;
        agg.count += 1;
    }

    // fill the gaps between the first and last occupied bucket
    let first = *buckets.keys().next().expect("nonempty");
    let last = *buckets.keys().next_back().expect("nonempty");
    let mut cursor = first;
    while cursor < last {
        cursor += Duration::seconds(width_secs);
        buckets.entry(cursor).or_insert_with(|| {
            labels
                .iter()
                .map(|l| (l.clone(), EmotionAggregate::default()))
                .collect()
        });
    }

    Ok(buckets
        .into_iter()
        .map(|(start, mut per_emotion)| {
            for agg in per_emotion.values_mut() {
                if agg.count > 0 {
                    agg.mean = agg.sum / agg.count as f64;
                }
            }
            TimelineBucket {
                bucket_start: offset
                    .from_local_datetime(&start)
                    .single()
                    .expect("fixed offsets are unambiguous"),
                per_emotion,
            }
        })
        .collect())
}

/// Counts and mean fused score per emotion for one sender.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SenderProfile {
    pub counts: BTreeMap<String, usize>,
    pub mean_scores: BTreeMap<String, f64>,
}

/// Five-number summary of fused scores for one emotion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile (the common "R-7" rule) over sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// The full chat report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReport {
    pub total_messages: usize,
    /// Dominant-emotion counts over the whole chat.
    pub totals: BTreeMap<String, usize>,
    /// Most prevalent dominant emotion (ties to the lexicographically
    /// smaller label).
    pub headline_emotion: String,
    /// Bucket with the highest total fused score (ties to the earliest).
    pub peak_bucket_start: DateTime<FixedOffset>,
    pub buckets: Vec<TimelineBucket>,
    pub senders: BTreeMap<String, SenderProfile>,
    /// Fused-score five-number summary per emotion (messages grouped by
    /// dominant emotion).
    pub score_distributions: BTreeMap<String, ScoreDistribution>,
}

/// Aggregates scored messages and their buckets into a report.
pub fn build_report(scored: &[ScoredMessage], buckets: &[TimelineBucket]) -> Result<ChatReport> {
    if scored.is_empty() {
        return Err(Error::NoMessages);
    }
    let labels: Vec<String> = scored[0].probs.keys().cloned().collect();

    let mut totals: BTreeMap<String, usize> = labels.iter().map(|l| (l.clone(), 0)).collect();
    let mut senders: BTreeMap<String, SenderProfile> = BTreeMap::new();
    let mut scores_by_emotion: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for m in scored {
        *totals.entry(m.dominant.clone()).or_insert(0) += 1;
        let profile = senders.entry(m.sender.clone()).or_default();
        *profile.counts.entry(m.dominant.clone()).or_insert(0) += 1;
        *profile.mean_scores.entry(m.dominant.clone()).or_insert(0.0) += m.fused_score;
        scores_by_emotion.entry(m.dominant.clone()).or_default().push(m.fused_score);
    }
    for profile in senders.values_mut() {
        for (emotion, total) in profile.mean_scores.iter_mut() {
            *total /= profile.counts[emotion] as f64;
        }
    }

    let headline_emotion = totals
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(l, _)| l.clone())
        .expect("nonempty totals");

    let peak_bucket_start = buckets
        .iter()
        .max_by(|a, b| {
            a.total_score()
                .total_cmp(&b.total_score())
                .then(b.bucket_start.cmp(&a.bucket_start))
        })
        .map(|b| b.bucket_start)
        .unwrap_or(scored[0].timestamp);

    let mut score_distributions = BTreeMap::new();
    for (emotion, mut values) in scores_by_emotion {
        values.sort_by(f64::total_cmp);
        score_distributions.insert(
            emotion,
            ScoreDistribution {
                count: values.len(),
                min: values[0],
                q1: quantile(&values, 0.25),
                median: quantile(&values, 0.5),
                q3: quantile(&values, 0.75),
                max: values[values.len() - 1],
            },
        );
    }

    Ok(ChatReport {
        total_messages: scored.len(),
        totals,
        headline_emotion,
        peak_bucket_start,
        buckets: buckets.to_vec(),
        senders,
        score_distributions,
    })
}

/// File names written by [`export_report`].
pub const REPORT_FILE: &str = "report.json";
pub const STACKED_SCORES_FILE: &str = "stacked_scores.csv";
pub const STACKED_COUNTS_FILE: &str = "stacked_counts.csv";
pub const MEAN_SCORES_FILE: &str = "mean_scores.csv";
pub const MESSAGES_FILE: &str = "messages.jsonl";

fn bucket_table(
    buckets: &[TimelineBucket],
    labels: &[String],
    cell: impl Fn(&EmotionAggregate) -> String,
) -> String {
    let mut out = String::from("bucket_start");
    for l in labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for b in buckets {
        let _ = write!(out, "{}", b.bucket_start.to_rfc3339());
        for l in labels {
            let agg = b.per_emotion.get(l).copied().unwrap_or_default();
            let _ = write!(out, ",{}", cell(&agg));
        }
        out.push('\n');
    }
    out
}

/// Writes the machine-readable report plus the plot-data tables:
/// per-bucket stacked sums and counts (stacked bar chart data), per-bucket
/// means (line chart data) and the per-message records. Output is
/// byte-stable for identical input.
pub fn export_report(report: &ChatReport, scored: &[ScoredMessage], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let labels: Vec<String> = report.totals.keys().cloned().collect();

    let mut report_bytes = serde_json::to_vec_pretty(report)?;
    report_bytes.push(b'\n');

    let mut messages_out = String::new();
    for m in scored {
        let _ = writeln!(messages_out, "{}", serde_json::to_string(m)?);
    }

    let files = [
        (REPORT_FILE, report_bytes),
        (
            STACKED_SCORES_FILE,
            bucket_table(&report.buckets, &labels, |a| a.sum.to_string()).into_bytes(),
        ),
        (
            STACKED_COUNTS_FILE,
            bucket_table(&report.buckets, &labels, |a| a.count.to_string()).into_bytes(),
        ),
        (
            MEAN_SCORES_FILE,
            bucket_table(&report.buckets, &labels, |a| a.mean.to_string()).into_bytes(),
        ),
        (MESSAGES_FILE, messages_out.into_bytes()),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
