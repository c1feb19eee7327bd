use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::Tokenizer;
use crate::types::{Document, Origin, META_CHUNK_INDEX, META_PARENT_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            chunk_size: 200,
            overlap: 50,
        }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::config("chunk_size must be positive"));
        }
        if self.overlap >= self.chunk_size {
            return Err(Error::config(format!(
                "overlap ({}) must be smaller than chunk_size ({})",
                self.overlap, self.chunk_size
            )));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_size - self.overlap
    }
}

/// Token-index windows for a text of `total` tokens. Window `i` starts at
/// `i * stride`; generation stops once a window reaches the last token.
pub fn chunk_windows(total: usize, config: ChunkConfig) -> Result<Vec<Range<usize>>> {
    config.validate()?;
    let mut windows = Vec::new();
    if total == 0 {
        return Ok(windows);
    }
    let mut start = 0;
    loop {
        let end = (start + config.chunk_size).min(total);
        windows.push(start..end);
        if end == total {
            return Ok(windows);
        }
        start += config.stride();
    }
}

/// Splits a long text into overlapping fixed-size token windows. Chunk text
/// is the original substring from the first to the last token of the window.
pub fn chunk_long_document(
    parent_id: &str,
    text: &str,
    config: ChunkConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Document>> {
    config.validate()?;
    let spans = tokenizer.spans(text);
    if spans.is_empty() {
        return Err(Error::EmptyInput(format!("document `{parent_id}` has no tokens")));
    }
    let windows = chunk_windows(spans.len(), config)?;
    Ok(windows
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let bytes = spans[w.start].start..spans[w.end - 1].end;
            Document::new(format!("{parent_id}-chunk-{i}"), &text[bytes])
                .with_origin(Origin::LongDocChunk)
                .with_meta(META_PARENT_ID, parent_id)
                .with_meta(META_CHUNK_INDEX, i.to_string())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::WhitespaceTokenizer;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn five_hundred_tokens_make_three_chunks() {
        let chunks = chunk_long_document("book", &words(500), ChunkConfig::default(), &WhitespaceTokenizer).unwrap();
        assert_eq!(chunks.len(), 3);
        let firsts: Vec<_> = chunks
            .iter()
            .map(|c| c.text.split(' ').next().unwrap().to_string())
            .collect();
        assert_eq!(firsts, vec!["t0", "t150", "t300"]);
        assert_eq!(chunks[2].id, "book-chunk-2");
        assert_eq!(chunks[2].source_meta[META_PARENT_ID], "book");
        for c in &chunks {
            c.validate().unwrap();
        }
    }

    #[test]
    fn short_text_is_a_single_chunk() {
        let text = words(100);
        let chunks = chunk_long_document("d", &text, ChunkConfig::default(), &WhitespaceTokenizer).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, text);
    }

    #[test]
    fn exact_fit_has_no_second_window() {
        let chunks = chunk_long_document("d", &words(200), ChunkConfig::default(), &WhitespaceTokenizer).unwrap();
        assert_eq!(chunks.len(), 1);
    }

    #[test]
    fn chunk_text_keeps_original_spacing() {
        let cfg = ChunkConfig {
            chunk_size: 2,
            overlap: 1,
        };
        let chunks = chunk_long_document("d", "a  b\nc", cfg, &WhitespaceTokenizer).unwrap();
        let texts: Vec<_> = chunks.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, vec!["a  b", "b\nc"]);
    }

    #[test]
    fn configuration_errors() {
        let bad = ChunkConfig {
            chunk_size: 50,
            overlap: 50,
        };
        assert!(matches!(
            chunk_long_document("d", "x", bad, &WhitespaceTokenizer),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            chunk_long_document("d", "  ", ChunkConfig::default(), &WhitespaceTokenizer),
            Err(Error::EmptyInput(_))
        ));
    }
}
