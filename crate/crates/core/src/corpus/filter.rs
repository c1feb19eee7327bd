use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::Tokenizer;
use crate::types::Document;

/// Inclusive token-count bounds. `max = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBounds {
    pub min: usize,
    pub max: Option<usize>,
}

impl Default for TokenBounds {
    fn default() -> Self {
        Self {
            min: 20,
            max: Some(8192),
        }
    }
}

impl TokenBounds {
    pub fn new(min: usize, max: Option<usize>) -> Result<Self> {
        let bounds = Self { min, max };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn unbounded() -> Self {
        Self { min: 1, max: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min == 0 {
            return Err(Error::config("min_tokens must be positive"));
        }
        match self.max {
            Some(0) => Err(Error::config("max_tokens must be positive")),
            Some(max) if self.min > max => Err(Error::config(format!(
                "min_tokens ({}) exceeds max_tokens ({max})",
                self.min
            ))),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, tokens: usize) -> bool {
        tokens >= self.min && self.max.is_none_or(|max| tokens <= max)
    }
}

/// Keeps documents whose token count lies within `bounds`, preserving order.
pub fn filter_documents<'t, I>(
    docs: I,
    bounds: TokenBounds,
    tokenizer: &'t dyn Tokenizer,
) -> Result<impl Iterator<Item = Document> + 't>
where
    I: IntoIterator<Item = Document>,
    I::IntoIter: 't,
{
    bounds.validate()?;
    Ok(docs
        .into_iter()
        .filter(move |d| bounds.contains(tokenizer.count(&d.text))))
}

/// Hook for scrubbing personal or offensive content before generation.
pub trait Redactor: Send + Sync {
    fn redact(&self, doc: Document) -> Document;
}

/// Passes documents through untouched.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopRedactor;

impl Redactor for NoopRedactor {
    fn redact(&self, doc: Document) -> Document {
        doc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::WhitespaceTokenizer;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn doc_of_len(id: &str, n: usize) -> Document {
        Document::new(id, vec!["w"; n].join(" "))
    }

    #[test]
    fn keeps_only_in_bounds_documents() {
        let docs = vec![doc_of_len("a", 3), doc_of_len("b", 50), doc_of_len("c", 9000)];
        let kept: Vec<_> = filter_documents(docs, TokenBounds::new(5, Some(5000)).unwrap(), &WhitespaceTokenizer)
            .unwrap()
            .map(|d| d.id)
            .collect();
        assert_eq!(kept, vec!["b"]);
    }

    #[test]
    fn unbounded_is_identity() {
        let docs = vec![doc_of_len("a", 1), doc_of_len("b", 100_000)];
        let kept: Vec<_> = filter_documents(docs.clone(), TokenBounds::unbounded(), &WhitespaceTokenizer)
            .unwrap()
            .collect();
        assert_eq!(kept, docs);
    }

    #[test]
    fn rejects_inverted_bounds() {
        let err = filter_documents(Vec::new(), TokenBounds { min: 10, max: Some(5) }, &WhitespaceTokenizer)
            .err()
            .unwrap();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn matches_linear_scan_on_random_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lens: Vec<usize> = (0..1000).map(|_| rng.gen_range(1..=200)).collect();
        let docs: Vec<Document> = lens
            .iter()
            .enumerate()
            .map(|(i, &n)| doc_of_len(&i.to_string(), n))
            .collect();
        let got: Vec<String> = filter_documents(docs, TokenBounds::new(10, Some(100)).unwrap(), &WhitespaceTokenizer)
            .unwrap()
            .map(|d| d.id)
            .collect();
        let mut expected = Vec::new();
        for (i, &n) in lens.iter().enumerate() {
            if (10..=100).contains(&n) {
                expected.push(i.to_string());
            }
        }
        assert_eq!(got, expected);
    }

    proptest! {
        #[test]
        fn filtering_is_idempotent(lens in proptest::collection::vec(1usize..60, 0..40), min in 1usize..30, span in 0usize..30) {
            let bounds = TokenBounds::new(min, Some(min + span)).unwrap();
            let docs: Vec<Document> = lens.iter().enumerate().map(|(i, &n)| doc_of_len(&i.to_string(), n)).collect();
            let once: Vec<_> = filter_documents(docs, bounds, &WhitespaceTokenizer).unwrap().collect();
            let twice: Vec<_> = filter_documents(once.clone(), bounds, &WhitespaceTokenizer).unwrap().collect();
            prop_assert_eq!(once, twice);
        }
    }
}
