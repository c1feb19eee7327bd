//! Deterministic stand-ins for model services.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde_json::Value;

use super::transport::Transport;
use super::{ChatParams, ChatProvider, Embedder, Reranker};
use crate::error::{Error, ProviderError, Result};
use crate::tokenize::{terms, WordPunctTokenizer};

/// 64-bit FNV-1a; stable across platforms and releases.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Replies with the prompt itself.
#[derive(Debug, Default, Clone, Copy)]
pub struct EchoChat;

impl ChatProvider for EchoChat {
    fn complete(&self, prompt: &str, _: &ChatParams) -> Result<String> {
        Ok(prompt.to_string())
    }
}

/// Replies from a fixed queue, in call order. Running dry is a provider
/// error.
#[derive(Debug, Default)]
pub struct ScriptedChat {
    replies: Mutex<VecDeque<String>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedChat {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

impl ChatProvider for ScriptedChat {
    fn complete(&self, prompt: &str, _: &ChatParams) -> Result<String> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| Error::Provider(ProviderError::Contract("scripted chat has no replies left".into())))
    }
}

/// Chat backed by a closure over the prompt.
pub struct FnChat<F>(pub F);

impl<F> ChatProvider for FnChat<F>
where
    F: Fn(&str) -> Result<String> + Send + Sync,
{
    fn complete(&self, prompt: &str, _: &ChatParams) -> Result<String> {
        (self.0)(prompt)
    }
}

/// Counts calls made through it.
pub struct CountingChat<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C> CountingChat<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<C: ChatProvider> ChatProvider for CountingChat<C> {
    fn complete(&self, prompt: &str, params: &ChatParams) -> Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(prompt, params)
    }
}

/// Fails the first `failures` requests with a transient 503, then forwards.
pub struct FaultInjectingTransport {
    inner: Arc<dyn Transport>,
    failures: usize,
    attempts: AtomicUsize,
}

impl FaultInjectingTransport {
    pub fn new(inner: Arc<dyn Transport>, failures: usize) -> Self {
        Self {
            inner,
            failures,
            attempts: AtomicUsize::new(0),
        }
    }

    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl Transport for FaultInjectingTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let n = self.attempts.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            return Err(ProviderError::Transient {
                status: Some(503),
                message: format!("injected failure {}", n + 1),
            });
        }
        self.inner.post_json(path, body)
    }
}

/// Feature-hashing bag-of-words embedder: each term sets one coordinate,
/// and the vector is L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self { dim: 512 }
    }
}

impl HashEmbedder {
    pub fn vector(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim];
        for t in terms(text, &WordPunctTokenizer) {
            v[(stable_hash(t.as_bytes()) % self.dim as u64) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

pub struct FnEmbedder<F>(pub F);

impl<F> Embedder for FnEmbedder<F>
where
    F: Fn(&str) -> Vec<f32> + Send + Sync,
{
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        Ok(texts.iter().map(|t| (self.0)(t)).collect())
    }
}

/// Scores a document by the share of query terms it contains, plus a small
/// per-reranker perturbation so that several instances disagree slightly.
#[derive(Debug, Clone)]
pub struct TokenOverlapReranker {
    id: String,
    jitter: f64,
}

impl TokenOverlapReranker {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            jitter: 0.0,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }
}

impl Reranker for TokenOverlapReranker {
    fn id(&self) -> &str {
        &self.id
    }

    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        let q: std::collections::HashSet<String> = terms(query, &WordPunctTokenizer).into_iter().collect();
        Ok(docs
            .iter()
            .map(|d| {
                let dt: std::collections::HashSet<String> = terms(d, &WordPunctTokenizer).into_iter().collect();
                let hits = q.intersection(&dt).count() as f64;
                let base = if q.is_empty() { 0.0 } else { hits / q.len() as f64 };
                let noise = if self.jitter == 0.0 {
                    0.0
                } else {
                    let h = stable_hash(format!("{}\u{1f}{query}\u{1f}{d}", self.id).as_bytes());
                    self.jitter * ((h % 10_000) as f64 / 10_000.0 - 0.5)
                };
                base + noise
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct ConstantReranker {
    pub id: String,
    pub score: f64,
}

impl Reranker for ConstantReranker {
    fn id(&self) -> &str {
        &self.id
    }

    fn rerank_score(&self, _: &str, docs: &[&str]) -> Result<Vec<f64>> {
        Ok(vec![self.score; docs.len()])
    }
}

/// Looks scores up in a `(query, document) -> score` table; unknown pairs
/// score `default`.
#[derive(Debug, Clone)]
pub struct ScriptedReranker {
    pub id: String,
    pub table: HashMap<(String, String), f64>,
    pub default: f64,
}

impl ScriptedReranker {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            table: HashMap::new(),
            default: 0.0,
        }
    }

    pub fn with(mut self, query: &str, doc: &str, score: f64) -> Self {
        self.table.insert((query.to_string(), doc.to_string()), score);
        self
    }
}

impl Reranker for ScriptedReranker {
    fn id(&self) -> &str {
        &self.id
    }

    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        Ok(docs
            .iter()
            .map(|d| {
                *self
                    .table
                    .get(&(query.to_string(), d.to_string()))
                    .unwrap_or(&self.default)
            })
            .collect())
    }
}

pub struct FnReranker<F> {
    pub id: String,
    pub score: F,
}

impl<F> Reranker for FnReranker<F>
where
    F: Fn(&str, &str) -> Result<f64> + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        docs.iter().map(|d| (self.score)(query, d)).collect()
    }
}
