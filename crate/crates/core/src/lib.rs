//! emoflow-core: emotion analytics for chat conversations.
//!
//! The crate combines two evidence sources per message:
//!
//! 1. a text emotion classifier producing a probability distribution over a
//!    fixed emotion label set (six classical models trained from scratch, a
//!    toy transformer encoder, or a remote inference service), and
//! 2. an emoji sentiment lexicon mapping individual emoji codepoints to
//!    empirical negative/neutral/positive usage fractions.
//!
//! Each message gets a dominant emotion, a text confidence score, per-emoji
//! intensity factors, and a fused score that scales the text confidence by
//! the mean emoji intensity. Timeline aggregation then turns a scored chat
//! log into hourly (or arbitrary-width) emotion buckets, per-sender profiles,
//! and exportable plot data.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`lexicon`]: emoji sentiment lexicon loading, emoji extraction,
//!   intensity factors
//! - [`text`]: bag-of-words features and the six classical classifiers
//! - [`encoder`]: transformer encoder forward pass at toy scale, plus the
//!   remote-inference adapter
//! - [`fusion`]: softmax, dominant emotion, text/emoji score fusion
//! - [`analytics`]: chat ingestion, batch scoring, timeline buckets, reports
//! - [`eval`]: stratified splits, multiclass metrics, model comparison
//!
//! With the default `parallel` feature the batch paths (forest training,
//! one-vs-rest SVM, KNN prediction, chat scoring) fan out via rayon; the
//! same code builds without it for a fully sequential library. Outputs are
//! identical either way: all per-item randomness is derived from explicit
//! seeds, never from scheduling.

pub mod analytics;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod fusion;
pub mod lexicon;
pub mod text;

pub(crate) mod par;

pub use error::{Error, Result};
