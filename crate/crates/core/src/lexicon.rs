//! Emoji sentiment lexicon: loading, emoji extraction, intensity factors.
//!
//! The lexicon file follows the Emoji Sentiment Ranking CSV layout: a header
//! row, then one row per emoji with columns `char` (the literal emoji),
//! `codepoint` (hex, `0x1F60D`), `occurrences` (integer), and the empirical
//! `negative` / `neutral` / `positive` usage fractions. Column names are
//! matched case-insensitively and extra columns are ignored; an optional
//! `name` column supplies the human-readable label. Only `codepoint` and the
//! three score columns feed any computation (`occurrences` is metadata), so
//! those four are the ones the loader requires.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Per-emoji sentiment scores: empirical fractions of negative, neutral and
/// positive usage. Each lies in [0, 1] and the three sum to 1 within 0.02.
#[derive(Debug, Clone, PartialEq)]
pub struct EmojiSentimentEntry {
    pub codepoint: char,
    pub name: String,
    pub neg: f64,
    pub neut: f64,
    pub pos: f64,
}

/// Slack allowed on `neg + neut + pos` vs 1.0; the scores are empirical
/// fractions rounded independently.
pub const SCORE_SUM_TOLERANCE: f64 = 0.02;

impl EmojiSentimentEntry {
    pub fn new(codepoint: char, name: impl Into<String>, neg: f64, neut: f64, pos: f64) -> Result<Self> {
        let entry = Self { codepoint, name: name.into(), neg, neut, pos };
        entry.validate()?;
        Ok(entry)
    }

    fn validate(&self) -> Result<()> {
        for (label, v) in [("negative", self.neg), ("neutral", self.neut), ("positive", self.pos)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{} score {} outside [0, 1] for U+{:04X}",
                    label, v, self.codepoint as u32
                )));
            }
        }
        let sum = self.neg + self.neut + self.pos;
        if (sum - 1.0).abs() > SCORE_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "scores sum to {} (must be within {} of 1.0) for U+{:04X}",
                sum,
                SCORE_SUM_TOLERANCE,
                self.codepoint as u32
            )));
        }
        Ok(())
    }
}

/// Sentiment intensity factor of one emoji: `1 + max(neg, neut, pos)`.
///
/// Since every score is a fraction in [0, 1] and real lexicon maxima stay
/// below 1, the factor lies in [1, 2).
pub fn intensity_factor(entry: &EmojiSentimentEntry) -> f64 {
    1.0 + entry.neg.max(entry.neut).max(entry.pos)
}

/// Immutable emoji sentiment lexicon keyed by codepoint.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    entries: BTreeMap<char, EmojiSentimentEntry>,
    source: String,
}

/// Row-level failure handling for [`load_lexicon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Any invalid row fails the whole load. Default.
    Strict,
    /// Invalid rows are skipped; diagnostics are returned alongside.
    Lenient,
}

/// Summary statistics for one score column.
#[derive(Debug, Clone, Copy)]
pub struct ColumnStats {
    pub count: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
}

fn column_stats(values: impl Iterator<Item = f64>) -> ColumnStats {
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for v in values {
        count += 1;
        sum += v;
        max = max.max(v);
        min = min.min(v);
    }
    ColumnStats { count, mean: sum / count as f64, max, min }
}

impl SentimentLexicon {
    /// Builds a lexicon from validated entries. Fails on duplicates or when
    /// empty.
    pub fn from_entries(entries: Vec<EmojiSentimentEntry>, source: impl Into<String>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for entry in entries {
            entry.validate()?;
            let cp = entry.codepoint;
            if map.insert(cp, entry).is_some() {
                return Err(Error::DuplicateCodepoint(cp as u32));
            }
        }
        if map.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(Self { entries: map, source: source.into() })
    }

    pub fn get(&self, codepoint: char) -> Option<&EmojiSentimentEntry> {
        self.entries.get(&codepoint)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Entries in codepoint order.
    pub fn iter(&self) -> impl Iterator<Item = &EmojiSentimentEntry> {
        self.entries.values()
    }

    /// Per-column summary statistics over all entries.
    pub fn stats(&self) -> LexiconStats {
        LexiconStats {
            neg: column_stats(self.iter().map(|e| e.neg)),
            neut: column_stats(self.iter().map(|e| e.neut)),
            pos: column_stats(self.iter().map(|e| e.pos)),
        }
    }

    /// Serializes back to the lexicon CSV layout, entries in codepoint order.
    /// Scores print in shortest round-trip form, so load → save → load is an
    /// identity on the entry map.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("char,codepoint,occurrences,negative,neutral,positive,name\n");
        for e in self.iter() {
            let _ = writeln!(
                out,
                "{},0x{:04X},0,{},{},{},{}",
                e.codepoint, e.codepoint as u32, e.neg, e.neut, e.pos, e.name
            );
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LexiconStats {
    pub neg: ColumnStats,
    pub neut: ColumnStats,
    pub pos: ColumnStats,
}

/// Loads a lexicon CSV. Returns the lexicon plus one diagnostic string per
/// skipped row (always empty in strict mode, where a bad row is an error
/// instead).
pub fn load_lexicon(path: &Path, mode: LoadMode) -> Result<(SentimentLexicon, Vec<String>)> {
    if !path.exists() {
        return Err(Error::MissingFile(path.display().to_string()));
    }
    let file_label = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;

    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Option<usize> {
        headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let idx_codepoint = col("codepoint").ok_or_else(|| Error::MalformedRow {
        file: file_label.clone(),
        line: 1,
        reason: "missing required column `codepoint`".into(),
    })?;
    let score_cols = ["negative", "neutral", "positive"].map(|name| {
        col(name).ok_or_else(|| Error::MalformedRow {
            file: file_label.clone(),
            line: 1,
            reason: format!("missing required column `{name}`"),
        })
    });
    let [idx_neg, idx_neut, idx_pos] = score_cols;
    let (idx_neg, idx_neut, idx_pos) = (idx_neg?, idx_neut?, idx_pos?);
    let idx_name = col("name");

    let mut entries: BTreeMap<char, EmojiSentimentEntry> = BTreeMap::new();
    let mut skipped = Vec::new();

    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2; // 1-based, after the header
        let fail = |reason: String| Error::MalformedRow {
            file: file_label.clone(),
            line,
            reason,
        };
        let parsed: Result<EmojiSentimentEntry> = (|| {
            let record = record.map_err(|e| fail(e.to_string()))?;
            let field = |idx: usize, what: &str| {
                record
                    .get(idx)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| fail(format!("missing {what}")))
            };
            let cp_raw = field(idx_codepoint, "codepoint")?;
            let cp_hex = cp_raw
                .strip_prefix("0x")
                .or_else(|| cp_raw.strip_prefix("0X"))
                .unwrap_or(cp_raw);
            let cp_val = u32::from_str_radix(cp_hex, 16)
                .map_err(|_| fail(format!("bad codepoint `{cp_raw}`")))?;
            let codepoint = char::from_u32(cp_val)
                .ok_or_else(|| fail(format!("U+{cp_val:04X} is not a Unicode scalar value")))?;
            let score = |idx: usize, what: &str| -> Result<f64> {
                field(idx, what)?
                    .parse::<f64>()
                    .map_err(|_| fail(format!("non-numeric {what}")))
            };
            let neg = score(idx_neg, "negative score")?;
            let neut = score(idx_neut, "neutral score")?;
            let pos = score(idx_pos, "positive score")?;
            let name = idx_name
                .and_then(|i| record.get(i))
                .map(str::to_owned)
                .unwrap_or_else(|| format!("U+{cp_val:04X}"));
            EmojiSentimentEntry::new(codepoint, name, neg, neut, pos)
                .map_err(|e| fail(e.to_string()))
        })();

        match parsed {
            Ok(entry) => {
                let cp = entry.codepoint;
                match entries.entry(cp) {
                    std::collections::btree_map::Entry::Occupied(_) => match mode {
                        LoadMode::Strict => return Err(Error::DuplicateCodepoint(cp as u32)),
                        LoadMode::Lenient => {
                            skipped.push(format!("{file_label}:{line}: duplicate codepoint U+{:04X}", cp as u32));
                        }
                    },
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        slot.insert(entry);
                    }
                }
            }
            Err(e) => match mode {
                LoadMode::Strict => return Err(e),
                LoadMode::Lenient => skipped.push(e.to_string()),
            },
        }
    }

    if entries.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    Ok((
        SentimentLexicon { entries, source: file_label },
        skipped,
    ))
}

/// Unicode block membership used for emoji extraction. Explicit ranges keep
/// detection deterministic and dependency-free:
///
/// - Emoticons                         U+1F600–U+1F64F
/// - Miscellaneous Symbols/Pictographs U+1F300–U+1F5FF
/// - Transport and Map Symbols         U+1F680–U+1F6FF
/// - Supplemental Symbols/Pictographs  U+1F900–U+1F9FF
/// - Miscellaneous Symbols             U+2600–U+26FF
/// - Dingbats                          U+2700–U+27BF
///
/// Skin-tone modifiers (U+1F3FB–U+1F3FF) sit inside the pictographs block
/// but are not base emojis, so they are excluded: a modified emoji
/// decomposes to its base scalar. ZWJ and variation selectors fall outside
/// every listed block and drop out the same way.
pub fn is_emoji_scalar(c: char) -> bool {
    let cp = c as u32;
    if (0x1F3FB..=0x1F3FF).contains(&cp) {
        return false; // skin-tone modifier
    }
    matches!(
        cp,
        0x1F600..=0x1F64F
            | 0x1F300..=0x1F5FF
            | 0x1F680..=0x1F6FF
            | 0x1F900..=0x1F9FF
            | 0x2600..=0x26FF
            | 0x2700..=0x27BF
    )
}

/// All emoji scalars in `text`, in order of appearance, duplicates kept.
pub fn extract_emojis(text: &str) -> Vec<char> {
    text.chars().filter(|&c| is_emoji_scalar(c)).collect()
}

/// Removes emoji scalars (and skin-tone modifiers) from `text`, leaving the
/// words for the text classifier.
pub fn strip_emojis(text: &str) -> String {
    text.chars()
        .filter(|&c| {
            let cp = c as u32;
            !is_emoji_scalar(c) && !(0x1F3FB..=0x1F3FF).contains(&cp)
        })
        .collect()
}

/// Intensity factors of the message's emojis, in order of appearance.
/// Emojis missing from the lexicon carry no evidence and are skipped rather
/// than padded with a neutral factor.
pub fn message_intensities(text: &str, lexicon: &SentimentLexicon) -> Vec<f64> {
    extract_emojis(text)
        .into_iter()
        .filter_map(|c| lexicon.get(c).map(intensity_factor))
        .collect()
}
