//! Okapi BM25 over an in-memory inverted index.
//!
//! `score(q, d) = sum over query terms t of idf(t) * tf / (tf + k1 * (1 - b + b * dl / avgdl))`
//! with `idf(t) = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))`. A term repeated in
//! the query contributes once per occurrence.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::{terms, Tokenizer};
use crate::types::{Document, RankedList};

pub const DEFAULT_K1: f64 = 0.9;
pub const DEFAULT_B: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    pub k1: f64,
    pub b: f64,
    pub tokenizer: String,
    pub doc_ids: Vec<String>,
    pub doc_lengths: Vec<u32>,
    pub avgdl: f64,
    /// term -> (document index, term frequency), document indices ascending.
    pub postings: BTreeMap<String, Vec<(u32, u32)>>,
}

impl Bm25Index {
    pub fn build(corpus: &[Document], tokenizer: &dyn Tokenizer, k1: f64, b: f64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("cannot index an empty corpus".into()));
        }
        if !(k1 >= 0.0 && (0.0..=1.0).contains(&b)) {
            return Err(Error::config(format!("invalid BM25 parameters k1={k1}, b={b}")));
        }
        let counted: Vec<(u32, HashMap<String, u32>)> = corpus
            .par_iter()
            .map(|d| {
                let mut tf: HashMap<String, u32> = HashMap::new();
                let ts = terms(&d.text, tokenizer);
                let len = ts.len() as u32;
                for t in ts {
                    *tf.entry(t).or_default() += 1;
                }
                (len, tf)
            })
            .collect();
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        for (i, (_, tf)) in counted.iter().enumerate() {
            for (t, n) in tf {
                postings.entry(t.clone()).or_default().push((i as u32, *n));
            }
        }
        let doc_lengths: Vec<u32> = counted.iter().map(|(l, _)| *l).collect();
        let avgdl = doc_lengths.iter().map(|l| f64::from(*l)).sum::<f64>() / doc_lengths.len() as f64;
        Ok(Self {
            k1,
            b,
            tokenizer: tokenizer.name().to_string(),
            doc_ids: corpus.iter().map(|d| d.id.clone()).collect(),
            doc_lengths,
            avgdl,
            postings,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.postings.get(term).map_or(0, Vec::len) as f64;
        let total = self.doc_count() as f64;
        (1.0 + (total - n + 0.5) / (n + 0.5)).ln()
    }

    /// Top `k` documents sharing at least one term with the query, ties by
    /// doc id. Queries without indexed terms return an empty list.
    pub fn search(&self, query_id: &str, query: &str, tokenizer: &dyn Tokenizer, k: usize) -> RankedList {
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for t in terms(query, tokenizer) {
            let Some(list) = self.postings.get(&t) else { continue };
            let idf = self.idf(&t);
            for &(doc, tf) in list {
                let tf = f64::from(tf);
                let dl = f64::from(self.doc_lengths[doc as usize]);
                let norm = if self.avgdl > 0.0 {
                    self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
                } else {
                    self.k1
                };
                *acc.entry(doc).or_default() += idf * tf / (tf + norm);
            }
        }
        let scored = acc
            .into_iter()
            .map(|(d, s)| (self.doc_ids[d as usize].clone(), s))
            .collect();
        let mut list = RankedList::from_scores(query_id, scored);
        list.truncate(k);
        list
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let index: Self = serde_json::from_reader(std::io::BufReader::new(file))?;
        if index.doc_ids.len() != index.doc_lengths.len() {
            return Err(Error::integrity("index document tables disagree in length"));
        }
        Ok(index)
    }
}

pub fn bm25_build(corpus: &[Document], tokenizer: &dyn Tokenizer) -> Result<Bm25Index> {
    Bm25Index::build(corpus, tokenizer, DEFAULT_K1, DEFAULT_B)
}

pub fn bm25_search(index: &Bm25Index, query_id: &str, query: &str, tokenizer: &dyn Tokenizer, k: usize) -> RankedList {
    index.search(query_id, query, tokenizer, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::WordPunctTokenizer;

    #[test]
    fn single_doc_and_oov() {
        let idx = bm25_build(&[Document::new("d", "solar power")], &WordPunctTokenizer).unwrap();
        let hit = bm25_search(&idx, "q", "Solar", &WordPunctTokenizer, 10);
        assert_eq!(hit.doc_ids().collect::<Vec<_>>(), vec!["d"]);
        assert!(bm25_search(&idx, "q", "lunar", &WordPunctTokenizer, 10).is_empty());
        assert!(bm25_search(&idx, "q", "", &WordPunctTokenizer, 10).is_empty());
    }

    #[test]
    fn hand_computed_two_doc_score() {
        let docs = [Document::new("a", "cat cat dog"), Document::new("b", "dog")];
        let idx = bm25_build(&docs, &WordPunctTokenizer).unwrap();
        assert_eq!(idx.avgdl, 2.0);
        let idf_cat = (1.0f64 + (2.0 - 1.0 + 0.5) / 1.5).ln();
        let norm_a = 0.9 * (1.0 - 0.4 + 0.4 * 3.0 / 2.0);
        let expected = idf_cat * 2.0 / (2.0 + norm_a);
        let r = bm25_search(&idx, "q", "cat", &WordPunctTokenizer, 10);
        assert_eq!(r.len(), 1);
        assert!((r.entries[0].1 - expected).abs() < 1e-12);
    }

    #[test]
    fn save_load() {
        let docs = crate::synthetic::synthetic_corpus(20, 1);
        let idx = bm25_build(&docs, &WordPunctTokenizer).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("idx.json");
        idx.save(&p).unwrap();
        assert_eq!(Bm25Index::load(&p).unwrap(), idx);
        assert!(bm25_build(&[], &WordPunctTokenizer).is_err());
    }
}
