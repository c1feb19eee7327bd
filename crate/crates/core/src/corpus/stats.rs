use std::collections::BTreeMap;

use serde::Serialize;

use crate::tokenize::Tokenizer;
use crate::types::Document;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub avg_tokens: f64,
    /// Power-of-two buckets keyed by their upper bound (`<=16`, `<=32`, ...).
    pub token_histogram: BTreeMap<usize, usize>,
}

pub fn corpus_stats<'a>(docs: impl IntoIterator<Item = &'a Document>, tokenizer: &dyn Tokenizer) -> CorpusStats {
    let mut doc_count = 0;
    let mut total = 0usize;
    let mut token_histogram = BTreeMap::new();
    for doc in docs {
        let n = tokenizer.count(&doc.text);
        doc_count += 1;
        total += n;
        *token_histogram.entry(n.max(1).next_power_of_two()).or_insert(0) += 1;
    }
    let avg_tokens = if doc_count == 0 {
        0.0
    } else {
        total as f64 / doc_count as f64
    };
    CorpusStats {
        doc_count,
        avg_tokens,
        token_histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::WhitespaceTokenizer;

    #[test]
    fn summarizes_counts_and_buckets() {
        let docs = [Document::new("a", "x y"), Document::new("b", "x y z w v")];
        let stats = corpus_stats(&docs, &WhitespaceTokenizer);
        assert_eq!(stats.doc_count, 2);
        assert_eq!(stats.avg_tokens, 3.5);
        assert_eq!(stats.token_histogram.get(&2), Some(&1));
        assert_eq!(stats.token_histogram.get(&8), Some(&1));
        assert_eq!(stats.token_histogram.values().sum::<usize>(), stats.doc_count);
    }
}
