//! Client contracts for the three model services the pipeline consumes
//! (chat completion, text embedding, reranking), their HTTP implementations,
//! transcript record/replay, and deterministic mocks.

pub mod clock;
pub mod config;
pub mod http;
pub mod limiter;
pub mod mock;
pub mod retry;
pub mod simulated;
pub mod transport;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use clock::{Clock, SystemClock, VirtualClock};
pub use config::{ProviderConfig, Role, Secret};
pub use http::{HttpChat, HttpEmbedder, HttpReranker};
pub use retry::RetryPolicy;
pub use transport::{fingerprint, HttpTransport, RecordingTransport, ReplayTransport, Transcript, Transport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChatParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatParams {
    pub const GENERATION: ChatParams = ChatParams {
        temperature: 0.8,
        max_tokens: 2048,
    };

    pub const JUDGING: ChatParams = ChatParams {
        temperature: 0.0,
        max_tokens: 16,
    };
}

impl Default for ChatParams {
    fn default() -> Self {
        Self::GENERATION
    }
}

pub trait ChatProvider: Send + Sync {
    fn complete(&self, prompt: &str, params: &ChatParams) -> Result<String>;
}

pub trait Embedder: Send + Sync {
    /// One vector per input, in input order, all of the same dimension.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>>;
}

pub trait Reranker: Send + Sync {
    fn id(&self) -> &str;

    /// One score per document, in input order; higher is more relevant.
    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>>;
}

impl<T: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<T> {
    fn complete(&self, prompt: &str, params: &ChatParams) -> Result<String> {
        (**self).complete(prompt, params)
    }
}

impl<T: Embedder + ?Sized> Embedder for std::sync::Arc<T> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        (**self).embed(texts)
    }
}

impl<T: Reranker + ?Sized> Reranker for std::sync::Arc<T> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        (**self).rerank_score(query, docs)
    }
}
