use crate::error::{Error, ProviderError, Result};
use crate::providers::Embedder;
use crate::types::{Document, RankedList};

pub const DEFAULT_RECALL_K: usize = 1000;

/// Unit-normalized document vectors, built once and then read-only.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingIndex {
    ids: Vec<String>,
    vectors: Vec<Vec<f32>>,
}

fn normalize(mut v: Vec<f32>) -> Vec<f32> {
    let norm = v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x = (f64::from(*x) / norm) as f32);
    }
    v
}

impl EmbeddingIndex {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>, embedder: &dyn Embedder) -> Result<Self> {
        let docs: Vec<&Document> = docs.into_iter().collect();
        let texts: Vec<String> = docs.iter().map(|d| d.text.clone()).collect();
        let vectors = embedder.embed(&texts)?;
        if vectors.len() != docs.len() {
            return Err(ProviderError::Contract(format!(
                "embedder returned {} vectors for {} documents",
                vectors.len(),
                docs.len()
            ))
            .into());
        }
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(ProviderError::Contract("embedding dimensions differ within the corpus".into()).into());
            }
        }
        Ok(Self {
            ids: docs.iter().map(|d| d.id.clone()).collect(),
            vectors: vectors.into_iter().map(normalize).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Cosine similarity against every document; the top `k` with ties
    /// broken by ascending doc id.
    pub fn search(&self, query_id: &str, query_vector: &[f32], k: usize) -> Result<RankedList> {
        if let Some(first) = self.vectors.first() {
            if first.len() != query_vector.len() {
                return Err(ProviderError::Contract(format!(
                    "query vector has dimension {}, corpus vectors {}",
                    query_vector.len(),
                    first.len()
                ))
                .into());
            }
        }
        let q = normalize(query_vector.to_vec());
        let scored = self
            .ids
            .iter()
            .zip(&self.vectors)
            .map(|(id, v)| {
                let dot: f64 = v.iter().zip(&q).map(|(a, b)| f64::from(*a) * f64::from(*b)).sum();
                (id.clone(), dot)
            })
            .collect();
        let mut list = RankedList::from_scores(query_id, scored);
        list.truncate(k);
        Ok(list)
    }
}

/// Embeds the query text and searches the index.
pub fn recall_top_k(
    query_id: &str,
    query_text: &str,
    index: &EmbeddingIndex,
    embedder: &dyn Embedder,
    k: usize,
) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::config("recall depth must be positive"));
    }
    let v = embedder
        .embed(&[query_text.to_string()])?
        .pop()
        .ok_or_else(|| ProviderError::Contract("embedder returned no vector for the query".into()))?;
    index.search(query_id, &v, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::mock::{FnEmbedder, HashEmbedder};

    #[test]
    fn singleton_corpus() {
        let docs = [Document::new("only", "some text")];
        let idx = EmbeddingIndex::build(&docs, &HashEmbedder::default()).unwrap();
        let r = recall_top_k("q", "unrelated", &idx, &HashEmbedder::default(), 1000).unwrap();
        assert_eq!(r.doc_ids().collect::<Vec<_>>(), vec!["only"]);
    }

    #[test]
    fn one_hot_argmax() {
        let onehot = FnEmbedder(|t: &str| {
            let mut v = vec![0f32; 4];
            v[t.len() % 4] = 1.0;
            v
        });
        let docs: Vec<Document> = ["a", "bb", "ccc", "dddd"]
            .iter()
            .map(|t| Document::new(format!("d-{t}"), *t))
            .collect();
        let idx = EmbeddingIndex::build(&docs, &onehot).unwrap();
        let r = recall_top_k("q", "xy", &idx, &onehot, 2).unwrap();
        assert_eq!(r.entries[0].0, "d-bb");
        assert_eq!(r.len(), 2);
        // remaining orthogonal docs tie at zero and are ordered by id
        assert_eq!(r.entries[1].0, "d-a");
    }

    #[test]
    fn dimension_mismatch_is_a_contract_error() {
        let odd = FnEmbedder(|t: &str| vec![1.0; t.len()]);
        let docs = [Document::new("a", "x"), Document::new("b", "yy")];
        assert!(matches!(
            EmbeddingIndex::build(&docs, &odd),
            Err(Error::Provider(ProviderError::Contract(_)))
        ));
    }
}
