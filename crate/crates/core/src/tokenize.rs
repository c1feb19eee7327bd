//! Pluggable tokenizers.
//!
//! A tokenizer maps text to an ordered list of byte spans. Spans let the
//! chunker cut windows out of the original text without re-joining tokens,
//! so chunk text keeps its original spacing and punctuation.

use std::collections::HashSet;
use std::ops::Range;
use std::sync::Arc;

use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;

    /// Byte ranges of each token, in order.
    fn spans(&self, text: &str) -> Vec<Range<usize>>;

    fn tokenize<'a>(&self, text: &'a str) -> Vec<&'a str> {
        self.spans(text).into_iter().map(|r| &text[r]).collect()
    }

    fn count(&self, text: &str) -> usize {
        self.spans(text).len()
    }
}

/// Splits on Unicode word boundaries; every punctuation mark is its own
/// token and whitespace is dropped.
#[derive(Debug, Default, Clone, Copy)]
pub struct WordPunctTokenizer;

impl Tokenizer for WordPunctTokenizer {
    fn name(&self) -> &str {
        "wordpunct"
    }

    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        text.split_word_bound_indices()
            .filter(|(_, piece)| !piece.chars().all(char::is_whitespace))
            .map(|(start, piece)| start..start + piece.len())
            .collect()
    }
}

/// Splits on runs of Unicode whitespace only.
#[derive(Debug, Default, Clone, Copy)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    spans.push(s..i);
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push(s..text.len());
        }
        spans
    }
}

pub type TokenizerRef = Arc<dyn Tokenizer>;

pub const DEFAULT_TOKENIZER: &str = "wordpunct";

pub fn tokenizer_by_name(name: &str) -> Result<TokenizerRef> {
    match name {
        "wordpunct" => Ok(Arc::new(WordPunctTokenizer)),
        "whitespace" => Ok(Arc::new(WhitespaceTokenizer)),
        other => Err(Error::config(format!(
            "unknown tokenizer `{other}` (expected `wordpunct` or `whitespace`)"
        ))),
    }
}

pub fn default_tokenizer() -> TokenizerRef {
    Arc::new(WordPunctTokenizer)
}

pub fn count_tokens(text: &str, tokenizer: &dyn Tokenizer) -> usize {
    tokenizer.count(text)
}

/// Lowercased tokens that contain at least one alphanumeric character.
///
/// Used wherever lexical overlap is measured (BM25 terms, Jaccard overlap,
/// corpus similarity) so that punctuation never counts as shared vocabulary.
pub fn terms(text: &str, tokenizer: &dyn Tokenizer) -> Vec<String> {
    tokenizer
        .tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(str::to_lowercase)
        .collect()
}

/// Token-set Jaccard overlap of two texts, in [0, 1]. Two texts without any
/// terms have overlap 0.
pub fn jaccard_overlap(a: &str, b: &str, tokenizer: &dyn Tokenizer) -> f64 {
    let sa: HashSet<String> = terms(a, tokenizer).into_iter().collect();
    let sb: HashSet<String> = terms(b, tokenizer).into_iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}
