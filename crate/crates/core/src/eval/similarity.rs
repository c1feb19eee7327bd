use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::tokenize::{terms, Tokenizer};
use crate::types::Document;

/// Relative frequency of each lowercased term across all documents.
pub fn term_distribution(corpus: &[Document], tokenizer: &dyn Tokenizer) -> HashMap<String, f64> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for d in corpus {
        for t in terms(&d.text, tokenizer) {
            *counts.entry(t).or_default() += 1;
            total += 1;
        }
    }
    counts.into_iter().map(|(t, c)| (t, c as f64 / total as f64)).collect()
}

/// `sum min(w_a, w_b) / sum max(w_a, w_b)` over the union vocabulary.
pub fn weighted_jaccard(corpus_a: &[Document], corpus_b: &[Document], tokenizer: &dyn Tokenizer) -> Result<f64> {
    if corpus_a.is_empty() || corpus_b.is_empty() {
        return Err(Error::EmptyInput("weighted Jaccard needs two non-empty corpora".into()));
    }
    let a = term_distribution(corpus_a, tokenizer);
    let b = term_distribution(corpus_b, tokenizer);
    Ok(weighted_jaccard_of(&a, &b))
}

pub fn weighted_jaccard_of(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let mut vocab: Vec<&String> = a.keys().chain(b.keys()).collect();
    vocab.sort_unstable();
    vocab.dedup();
    let (mut lo, mut hi) = (0.0, 0.0);
    for t in vocab {
        let x = a.get(t).copied().unwrap_or(0.0);
        let y = b.get(t).copied().unwrap_or(0.0);
        lo += x.min(y);
        hi += x.max(y);
    }
    if hi == 0.0 {
        return if a.is_empty() && b.is_empty() { 1.0 } else { 0.0 };
    }
    lo / hi
}

/// Pairwise weighted Jaccard over named corpora. The diagonal is 1 for
/// corpora with at least one term.
pub fn similarity_matrix(
    corpora: &BTreeMap<String, Vec<Document>>,
    tokenizer: &dyn Tokenizer,
) -> Result<BTreeMap<(String, String), f64>> {
    if let Some((name, _)) = corpora.iter().find(|(_, c)| c.is_empty()) {
        return Err(Error::EmptyInput(format!("corpus `{name}` is empty")));
    }
    let dists: Vec<(&String, HashMap<String, f64>)> = corpora
        .iter()
        .map(|(n, c)| (n, term_distribution(c, tokenizer)))
        .collect();
    let mut out = BTreeMap::new();
    for (na, da) in &dists {
        for (nb, db) in &dists {
            out.insert(((*na).clone(), (*nb).clone()), weighted_jaccard_of(da, db));
        }
    }
    Ok(out)
}
