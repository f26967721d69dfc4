//! Regenerates the sample data under `data/`: the 751-entry emoji sentiment
//! lexicon stand-in and the one-day 113-message work chat. Both are pure
//! functions of fixed seeds, so reruns are byte-identical.
//!
//! Usage: `cargo run -p emoflow-core --example gen_fixtures [out_dir]`

use std::fmt::Write as _;
use std::path::PathBuf;

use emoflow_core::fixtures::{emoji_lexicon_csv, workday_chat};

fn main() -> std::io::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(&out_dir)?;

    let lexicon_path = out_dir.join("emoji_sentiment_sample.csv");
    std::fs::write(&lexicon_path, emoji_lexicon_csv())?;
    println!("wrote {}", lexicon_path.display());

    let chat = workday_chat(113, 20240311);
    let mut jsonl = String::new();
    for m in &chat {
        let _ = writeln!(
            jsonl,
            "{}",
            serde_json::json!({
                "sender": m.sender,
                "timestamp": m.timestamp.to_rfc3339(),
                "text": m.text,
            })
        );
    }
    let chat_path = out_dir.join("workday_chat.jsonl");
    std::fs::write(&chat_path, jsonl)?;
    println!("wrote {} ({} messages)", chat_path.display(), chat.len());
    Ok(())
}
