//! Filters a synthetic QA corpus by length and chunks a long text into
//! overlapping windows.
//!
//! `cargo run --example prepare_corpus [OUT_DIR]` also writes `raw.jsonl`
//! and `corpus.jsonl` to `OUT_DIR`.

use irbench::corpus::{chunk_long_document, corpus_stats, filter_documents, write_corpus, ChunkConfig, TokenBounds};
use irbench::synthetic::{synthetic_corpus, synthetic_long_text};
use irbench::tokenize::WordPunctTokenizer;

fn main() -> irbench::Result<()> {
    let tokenizer = WordPunctTokenizer;
    let raw = synthetic_corpus(200, 7);
    let bounds = TokenBounds::new(60, Some(120))?;
    let kept: Vec<_> = filter_documents(raw.clone(), bounds, &tokenizer)?.collect();
    println!("kept {} of {} documents with 60..=120 tokens", kept.len(), raw.len());
    println!("{:?}", corpus_stats(&kept, &tokenizer));

    let book = synthetic_long_text(1000, 3);
    let chunks = chunk_long_document("book", &book, ChunkConfig::default(), &tokenizer)?;
    println!("a 1000-token text gives {} chunks of up to 200 tokens", chunks.len());
    for c in chunks.iter().take(2) {
        println!("  {}: {}...", c.id, &c.text[..60.min(c.text.len())]);
    }

    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::Path::new(&dir);
        write_corpus(&raw, dir.join("raw.jsonl"))?;
        write_corpus(&kept, dir.join("corpus.jsonl"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
