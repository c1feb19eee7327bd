//! Weighted Jaccard similarity between the term distributions of corpora.

use std::collections::BTreeMap;

use irbench::eval::similarity_matrix;
use irbench::synthetic::synthetic_corpus;
use irbench::tokenize::WordPunctTokenizer;

fn main() -> irbench::Result<()> {
    let mut corpora = BTreeMap::new();
    let base = synthetic_corpus(200, 1);
    corpora.insert("half-a".to_string(), base[..100].to_vec());
    corpora.insert("half-b".to_string(), base[100..].to_vec());
    corpora.insert("other".to_string(), synthetic_corpus(50, 99));
    let m = similarity_matrix(&corpora, &WordPunctTokenizer)?;
    for ((a, b), s) in &m {
        if a < b {
            println!("{a:>7} vs {b:<7} {s:.4}");
        }
    }
    Ok(())
}
