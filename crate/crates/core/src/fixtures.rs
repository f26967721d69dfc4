//! Deterministic sample-data generators for tests, benches and demos.
//!
//! Real corpora (tweet datasets, the published emoji sentiment lexicon) are
//! user-supplied; these generators produce stand-ins with the same shape:
//!
//! - [`emoji_lexicon_csv`]: a 751-entry lexicon in the Emoji Sentiment
//!   Ranking CSV layout whose positive-column statistics match the published
//!   summary (mean ~0.447, max 0.972, min 0.007), including the well-known
//!   scores of U+1F60D.
//! - [`emotion_corpus`]: an n-row six-class corpus of short synthetic
//!   messages with class-signature vocabulary, shared filler and label
//!   noise, learnable but not trivially separable.
//! - [`workday_chat`]: a one-day four-person project chat with emoji usage,
//!   timestamps inside 09:00-18:00 at a fixed +05:00 offset.
//!
//! Everything is a pure function of its seed.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, FixedOffset, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::ChatMessage;
use crate::text::LabeledCorpus;

pub const EMOTION_LABELS: [&str; 6] = ["anger", "fear", "joy", "love", "sadness", "surprise"];

// ---------------------------------------------------------------------------
// Emoji lexicon fixture

/// Hand-pinned entries: the familiar scores for a few common emojis plus the
/// column extremes (positive max 0.972 / min 0.007, neutral max 0.987,
/// negative max 0.778).
const PINNED_ENTRIES: &[(u32, &str, f64, f64, f64)] = &[
    (0x1F60D, "SMILING FACE WITH HEART-SHAPED EYES", 0.052, 0.219, 0.729),
    (0x1F602, "FACE WITH TEARS OF JOY", 0.247, 0.285, 0.468),
    (0x2764, "HEAVY BLACK HEART", 0.037, 0.184, 0.779),
    (0x1F680, "ROCKET", 0.044, 0.452, 0.504),
    (0x26A0, "WARNING SIGN", 0.342, 0.451, 0.207),
    (0x1F621, "POUTING FACE", 0.533, 0.292, 0.175),
    (0x1F622, "CRYING FACE", 0.441, 0.340, 0.219),
    (0x1F44D, "THUMBS UP SIGN", 0.073, 0.345, 0.582),
    (0x1F389, "PARTY POPPER", 0.062, 0.258, 0.680),
    (0x1F525, "FIRE", 0.225, 0.421, 0.354),
    (0x1F49A, "GREEN HEART", 0.014, 0.014, 0.972),
    (0x1F6A8, "POLICE CARS REVOLVING LIGHT", 0.600, 0.393, 0.007),
    (0x1F5FF, "MOYAI", 0.006, 0.987, 0.007),
    (0x1F620, "ANGRY FACE", 0.778, 0.125, 0.097),
];

const LEXICON_SIZE: usize = 751;
const POSITIVE_MEAN_TARGET: f64 = 0.447;

fn fixture_codepoints() -> Vec<u32> {
    let pinned: Vec<u32> = PINNED_ENTRIES.iter().map(|e| e.0).collect();
    let ranges: [(u32, u32); 6] = [
        (0x1F600, 0x1F64F), // emoticons
        (0x1F300, 0x1F53D), // pictographs (assigned stretch)
        (0x1F680, 0x1F6C5), // transport
        (0x2600, 0x26FF),   // misc symbols
        (0x2700, 0x27BF),   // dingbats
        (0x1F900, 0x1F9FF), // supplemental
    ];
    let mut out = pinned.clone();
    'fill: for (lo, hi) in ranges {
        for cp in lo..=hi {
            if out.len() == LEXICON_SIZE {
                break 'fill;
            }
            if (0x1F3FB..=0x1F3FF).contains(&cp) || pinned.contains(&cp) {
                continue;
            }
            out.push(cp);
        }
    }
    assert_eq!(out.len(), LEXICON_SIZE);
    out
}

/// A 751-row lexicon CSV in the Emoji Sentiment Ranking layout. Fully
/// deterministic; the positive column lands on mean 0.447 (+/- 0.001) with
/// extremes exactly 0.972 and 0.007.
pub fn emoji_lexicon_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0E5);
    let codepoints = fixture_codepoints();
    let n_pinned = PINNED_ENTRIES.len();
    let n_tail = LEXICON_SIZE - n_pinned;

    // draw the tail's positive scores, then nudge them onto the target mean
    let mut pos: Vec<f64> = (0..n_tail).map(|_| rng.gen_range(0.05..0.85)).collect();
    let pinned_sum: f64 = PINNED_ENTRIES.iter().map(|e| e.4).sum();
    let target_tail_sum = POSITIVE_MEAN_TARGET * LEXICON_SIZE as f64 - pinned_sum;
    for _ in 0..64 {
        let current: f64 = pos.iter().sum();
        let delta = (target_tail_sum - current) / n_tail as f64;
        if delta.abs() < 1e-9 {
            break;
        }
        for p in &mut pos {
            *p = (*p + delta).clamp(0.010, 0.960);
        }
    }

    let round3 = |v: f64| (v * 1000.0).round() / 1000.0;
    let mut out = String::from("char,codepoint,occurrences,negative,neutral,positive,name\n");
    for (cp, name, neg, neut, p) in PINNED_ENTRIES {
        let ch = char::from_u32(*cp).expect("valid scalar");
        let occurrences = rng.gen_range(100..20000);
        let _ = writeln!(out, "{ch},0x{cp:04X},{occurrences},{neg},{neut},{p},{name}");
    }
    for (i, &cp) in codepoints[n_pinned..].iter().enumerate() {
        let p = round3(pos[i]);
        let rest = 1.0 - p;
        let neg_share = rng.gen_range(0.10..0.50);
        let neg = round3(rest * neg_share);
        let neut = round3(1.0 - p - neg);
        let ch = char::from_u32(cp).expect("valid scalar");
        let occurrences = rng.gen_range(5..15000);
        let _ = writeln!(
            out,
            "{ch},0x{cp:04X},{occurrences},{neg},{neut},{p},EMOJI U+{cp:04X}"
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Six-class text corpus

const SYLLABLES: [&str; 24] = [
    "ba", "ce", "di", "fo", "gu", "ha", "ki", "lo", "mu", "na", "pi", "ro", "sa", "te", "vi",
    "wo", "za", "len", "mor", "tus", "ver", "dal", "nis", "que",
];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=4);
    (0..n).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect()
}

/// A handful of real anchor words per emotion so samples read plausibly.
const ANCHORS: [&[&str]; 6] = [
    &["furious", "outraged", "annoyed", "unfair", "blocked"],
    &["worried", "deadline", "risky", "breaking", "anxious"],
    &["happy", "shipped", "awesome", "celebrate", "great"],
    &["adore", "appreciate", "wonderful", "dear", "thanks"],
    &["tired", "slipped", "failed", "missing", "regret"],
    &["unexpected", "suddenly", "whoa", "surprising", "unbelievable"],
];

/// An n-row corpus over the six emotion labels in the `text,label` shape:
/// each message mixes class-signature words, shared filler words and a dash
/// of one-off junk tokens; 8% of rows carry a flipped label.
pub fn emotion_corpus(n_rows: usize, seed: u64) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // vocabulary: 80 signature words per class (5 anchors + generated),
    // 900 shared filler words
    let mut signature: Vec<Vec<String>> = Vec::new();
    for anchors in ANCHORS {
        let mut words: Vec<String> = anchors.iter().map(|s| s.to_string()).collect();
        while words.len() < 80 {
            let w = pseudo_word(&mut rng);
            if !words.contains(&w) {
                words.push(w);
            }
        }
        signature.push(words);
    }
    let mut shared: Vec<String> = Vec::new();
    while shared.len() < 900 {
        let w = pseudo_word(&mut rng);
        if !shared.contains(&w) && !signature.iter().any(|s| s.contains(&w)) {
            shared.push(w);
        }
    }

    // zipf-ish pick: squared-uniform index biases toward the pool's head
    let zipf = |rng: &mut ChaCha8Rng, len: usize| -> usize {
        let u: f64 = rng.gen::<f64>();
        ((u * u) * len as f64) as usize % len
    };

    let mut junk_counter = 0usize;
    let mut documents = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let class = rng.gen_range(0..6);
        let length = rng.gen_range(8..=18);
        let mut words = Vec::with_capacity(length);
        for _ in 0..length {
            let roll: f64 = rng.gen();
            if roll < 0.55 {
                words.push(signature[class][zipf(&mut rng, 80)].clone());
            } else if roll < 0.93 {
                words.push(shared[zipf(&mut rng, 900)].clone());
            } else {
                junk_counter += 1;
                words.push(format!("junk{junk_counter}"));
            }
        }
        // 8% label noise
        let label_class = if rng.gen::<f64>() < 0.08 {
            (class + rng.gen_range(1..6)) % 6
        } else {
            class
        };
        documents.push((words.join(" "), EMOTION_LABELS[label_class].to_string()));
    }
    LabeledCorpus::from_documents(documents).expect("six labels present")
}

// ---------------------------------------------------------------------------
// Workday chat

const SENDERS: [&str; 4] = ["person1", "person2", "person3", "person4"];

const CHAT_LINES: [&str; 20] = [
    "morning all, standup in five",
    "the deploy pipeline is green again",
    "can someone review my merge request",
    "the staging database is acting up",
    "great work on the release notes",
    "we are slipping on the integration tests",
    "coffee machine is fixed, priorities sorted",
    "client call moved to after lunch",
    "found the root cause, it was a cache key",
    "docs are updated with the new endpoints",
    "need the numbers for the retro board",
    "the latency graphs look much better now",
    "blocked on the auth token rotation",
    "shipping the hotfix before the demo",
    "who owns the migration checklist",
    "tests pass locally but not in ci",
    "let us celebrate the milestone later",
    "the vendor api is timing out again",
    "pushed the fix, please pull latest",
    "wrapping up, see everyone tomorrow",
];

const CHAT_EMOJIS: [char; 10] = [
    '\u{1F60D}', '\u{1F602}', '\u{1F680}', '\u{2764}', '\u{26A0}', '\u{1F621}', '\u{1F622}',
    '\u{1F44D}', '\u{1F389}', '\u{1F525}',
];

/// A one-day project chat: `n` messages from four senders between 09:00 and
/// 18:00 (+05:00), roughly 60% of them carrying one or two emojis.
pub fn workday_chat(n: usize, seed: u64) -> Vec<ChatMessage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = FixedOffset::east_opt(5 * 3600).expect("+05:00");
    let day_start: DateTime<FixedOffset> = offset
        .with_ymd_and_hms(2024, 3, 11, 9, 0, 0)
        .single()
        .expect("valid datetime");

    let mut seconds: Vec<i64> = (0..n).map(|_| rng.gen_range(0..9 * 3600)).collect();
    seconds.sort_unstable();

    seconds
        .into_iter()
        .map(|s| {
            let sender = SENDERS[rng.gen_range(0..SENDERS.len())];
            let mut text = CHAT_LINES[rng.gen_range(0..CHAT_LINES.len())].to_string();
            if rng.gen::<f64>() < 0.6 {
                let count = if rng.gen::<f64>() < 0.25 { 2 } else { 1 };
                for _ in 0..count {
                    text.push(' ');
                    text.push(CHAT_EMOJIS[rng.gen_range(0..CHAT_EMOJIS.len())]);
                }
            }
            ChatMessage {
                sender: sender.to_string(),
                timestamp: day_start + Duration::seconds(s),
                text,
            }
        })
        .collect()
}
