//! Chat and embedding clients for the common chat-completions / embeddings
//! JSON interface, and a reranking client for the minimal
//! `{model, query, documents} -> {scores}` contract.

use std::sync::Arc;

use serde_json::{json, Value};

use super::clock::{Clock, SystemClock};
use super::config::ProviderConfig;
use super::limiter::{ConcurrencyGate, RateLimiter};
use super::transport::{HttpTransport, Transport};
use super::{ChatParams, ChatProvider, Embedder, Reranker};
use crate::error::{Error, ProviderError, Result};
use crate::tokenize::{default_tokenizer, TokenizerRef};

/// Transport plus the retry, rate-limit and concurrency policy around it.
struct Endpoint {
    transport: Arc<dyn Transport>,
    config: ProviderConfig,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
    gate: ConcurrencyGate,
}

impl Endpoint {
    fn new(config: ProviderConfig, transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            limiter: RateLimiter::new(config.rate_limit_per_minute, clock.clone()),
            gate: ConcurrencyGate::new(config.max_concurrency),
            transport,
            config,
            clock,
        })
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value> {
        let _permit = self.gate.enter();
        let policy = self.config.retry_policy();
        Ok(policy.run(self.clock.as_ref(), || {
            self.limiter.acquire();
            self.transport.post_json(path, body)
        })?)
    }
}

fn http_transport(config: &ProviderConfig) -> Arc<dyn Transport> {
    Arc::new(HttpTransport::new(
        &config.base_url,
        config.api_key.expose().map(str::to_string),
        config.timeout(),
    ))
}

fn contract(msg: impl Into<String>) -> Error {
    Error::Provider(ProviderError::Contract(msg.into()))
}

pub struct HttpChat {
    endpoint: Endpoint,
    tokenizer: TokenizerRef,
}

impl HttpChat {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let transport = http_transport(&config);
        Self::with_transport(config, transport, Arc::new(SystemClock::default()))
    }

    pub fn with_transport(
        config: ProviderConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        Ok(Self {
            endpoint: Endpoint::new(config, transport, clock)?,
            tokenizer: default_tokenizer(),
        })
    }
}

impl ChatProvider for HttpChat {
    fn complete(&self, prompt: &str, params: &ChatParams) -> Result<String> {
        if prompt.trim().is_empty() {
            return Err(Error::Precondition("chat prompt is empty".into()));
        }
        let tokens = self.tokenizer.count(prompt);
        let limit = self.endpoint.config.max_input_tokens;
        if tokens > limit {
            return Err(Error::InputTooLarge(format!(
                "prompt has {tokens} tokens, limit is {limit}"
            )));
        }
        let body = json!({
            "model": self.endpoint.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        });
        let resp = self.endpoint.post("chat/completions", &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| contract("chat response lacks choices[0].message.content"))
    }
}

pub struct HttpEmbedder {
    endpoint: Endpoint,
}

impl HttpEmbedder {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let transport = http_transport(&config);
        Self::with_transport(config, transport, Arc::new(SystemClock::default()))
    }

    pub fn with_transport(
        config: ProviderConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        Ok(Self {
            endpoint: Endpoint::new(config, transport, clock)?,
        })
    }

    fn embed_batch(&self, batch: &[String]) -> Result<Vec<Vec<f32>>> {
        let body = json!({"model": self.endpoint.config.model_name, "input": batch});
        let resp = self.endpoint.post("embeddings", &body)?;
        let data = resp
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| contract("embedding response lacks `data`"))?;
        let mut indexed = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
            let vector = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| contract("embedding item lacks `embedding`"))?
                .iter()
                .map(|x| x.as_f64().map(|f| f as f32))
                .collect::<Option<Vec<f32>>>()
                .ok_or_else(|| contract("embedding contains a non-number"))?;
            indexed.push((index, vector));
        }
        indexed.sort_by_key(|(i, _)| *i);
        if indexed.len() != batch.len() || indexed.iter().enumerate().any(|(pos, (i, _))| pos != *i) {
            return Err(contract(format!(
                "expected {} embeddings indexed 0..{}, got {}",
                batch.len(),
                batch.len(),
                indexed.len()
            )));
        }
        Ok(indexed.into_iter().map(|(_, v)| v).collect())
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.endpoint.config.batch_size) {
            out.extend(self.embed_batch(batch)?);
        }
        if let Some(first) = out.first() {
            let dim = first.len();
            if out.iter().any(|v| v.len() != dim) {
                return Err(contract("embedding dimensions differ within a request"));
            }
        }
        Ok(out)
    }
}

pub struct HttpReranker {
    id: String,
    endpoint: Endpoint,
}

impl HttpReranker {
    pub fn new(id: impl Into<String>, config: ProviderConfig) -> Result<Self> {
        let transport = http_transport(&config);
        Self::with_transport(id, config, transport, Arc::new(SystemClock::default()))
    }

    pub fn with_transport(
        id: impl Into<String>,
        config: ProviderConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            endpoint: Endpoint::new(config, transport, clock)?,
        })
    }
}

impl Reranker for HttpReranker {
    fn id(&self) -> &str {
        &self.id
    }

    fn rerank_score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        if docs.is_empty() {
            return Err(Error::Precondition("rerank called with no documents".into()));
        }
        let mut scores = Vec::with_capacity(docs.len());
        for batch in docs.chunks(self.endpoint.config.batch_size) {
            let body = json!({
                "model": self.endpoint.config.model_name,
                "query": query,
                "documents": batch,
                "max_length": self.endpoint.config.max_input_tokens,
            });
            let resp = self.endpoint.post("rerank", &body)?;
            let got = resp
                .get("scores")
                .and_then(Value::as_array)
                .ok_or_else(|| contract("rerank response lacks `scores`"))?
                .iter()
                .map(Value::as_f64)
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| contract("rerank scores must be numbers"))?;
            if got.len() != batch.len() {
                return Err(contract(format!("expected {} scores, got {}", batch.len(), got.len())));
            }
            scores.extend(got);
        }
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::clock::VirtualClock;
    use crate::providers::mock::FaultInjectingTransport;
    use std::sync::Mutex;

    /// Answers like a model server and records every request.
    #[derive(Default)]
    struct FakeServer {
        requests: Mutex<Vec<(String, Value)>>,
    }

    impl Transport for FakeServer {
        fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
            self.requests.lock().unwrap().push((path.to_string(), body.clone()));
            match path {
                "chat/completions" => Ok(json!({
                    "choices": [{"message": {"role": "assistant", "content": body["messages"][0]["content"]}}]
                })),
                "embeddings" => {
                    let input = body["input"].as_array().unwrap();
                    // reversed order with explicit indices
                    let data: Vec<Value> = input
                        .iter()
                        .enumerate()
                        .rev()
                        .map(|(i, t)| json!({"index": i, "embedding": [t.as_str().unwrap().len() as f64, 1.0]}))
                        .collect();
                    Ok(json!({"data": data}))
                }
                "rerank" => {
                    let docs = body["documents"].as_array().unwrap();
                    Ok(json!({"scores": docs.iter().map(|d| d.as_str().unwrap().len() as f64).collect::<Vec<_>>()}))
                }
                _ => Err(ProviderError::Status {
                    status: 404,
                    message: path.into(),
                }),
            }
        }
    }

    fn cfg() -> ProviderConfig {
        ProviderConfig {
            model_name: "m".into(),
            batch_size: 3,
            ..ProviderConfig::for_role(crate::providers::Role::Chat)
        }
    }

    #[test]
    fn chat_sends_openai_shaped_request() {
        let server = Arc::new(FakeServer::default());
        let chat = HttpChat::with_transport(cfg(), server.clone(), Arc::new(VirtualClock::new())).unwrap();
        assert_eq!(
            chat.complete("hello there", &ChatParams::JUDGING).unwrap(),
            "hello there"
        );
        let reqs = server.requests.lock().unwrap();
        assert_eq!(reqs[0].0, "chat/completions");
        assert_eq!(reqs[0].1["model"], "m");
        assert_eq!(reqs[0].1["temperature"], 0.0);
    }

    #[test]
    fn oversized_prompt_fails_before_any_request() {
        let server = Arc::new(FakeServer::default());
        let config = ProviderConfig {
            max_input_tokens: 3,
            ..cfg()
        };
        let chat = HttpChat::with_transport(config, server.clone(), Arc::new(VirtualClock::new())).unwrap();
        assert!(matches!(
            chat.complete("one two three four", &ChatParams::default()),
            Err(Error::InputTooLarge(_))
        ));
        assert!(server.requests.lock().unwrap().is_empty());
    }

    #[test]
    fn embedding_batches_concatenate_to_unbatched_output() {
        let texts: Vec<String> = (0..2048).map(|i| "x".repeat(i % 17 + 1)).collect();
        let small = HttpEmbedder::with_transport(cfg(), Arc::new(FakeServer::default()), Arc::new(VirtualClock::new()))
            .unwrap();
        let big = HttpEmbedder::with_transport(
            ProviderConfig {
                batch_size: 4096,
                ..cfg()
            },
            Arc::new(FakeServer::default()),
            Arc::new(VirtualClock::new()),
        )
        .unwrap();
        let a = small.embed(&texts).unwrap();
        assert_eq!(a, big.embed(&texts).unwrap());
        assert_eq!(a[5], vec![6.0, 1.0]);
        assert!(small.embed(&[]).unwrap().is_empty());
    }

    #[test]
    fn ragged_embeddings_break_the_contract() {
        struct Ragged;
        impl Transport for Ragged {
            fn post_json(&self, _: &str, _: &Value) -> Result<Value, ProviderError> {
                Ok(json!({"data": [{"index": 0, "embedding": [1.0]}, {"index": 1, "embedding": [1.0, 2.0]}]}))
            }
        }
        let e = HttpEmbedder::with_transport(cfg(), Arc::new(Ragged), Arc::new(VirtualClock::new())).unwrap();
        assert!(matches!(
            e.embed(&["a".into(), "b".into()]),
            Err(Error::Provider(ProviderError::Contract(_)))
        ));
    }

    #[test]
    fn reranker_scores_in_input_order() {
        let r = HttpReranker::with_transport(
            "r1",
            cfg(),
            Arc::new(FakeServer::default()),
            Arc::new(VirtualClock::new()),
        )
        .unwrap();
        let docs = ["a", "bbbb", "cc", "ddddd"];
        assert_eq!(r.rerank_score("q", &docs).unwrap(), vec![1.0, 4.0, 2.0, 5.0]);
        assert_eq!(r.id(), "r1");
    }

    #[test]
    fn transient_failures_are_retried_with_backoff() {
        let clock = Arc::new(VirtualClock::new());
        let flaky = Arc::new(FaultInjectingTransport::new(Arc::new(FakeServer::default()), 2));
        let config = ProviderConfig {
            max_retries: 3,
            ..cfg()
        };
        let chat = HttpChat::with_transport(config, flaky.clone(), clock.clone()).unwrap();
        assert_eq!(chat.complete("hi", &ChatParams::default()).unwrap(), "hi");
        assert_eq!(flaky.attempts(), 3);
        assert_eq!(clock.sleeps().len(), 2);
    }

    #[test]
    fn exhausted_retries_surface_as_provider_error() {
        let flaky = Arc::new(FaultInjectingTransport::new(Arc::new(FakeServer::default()), 10));
        let config = ProviderConfig {
            max_retries: 2,
            ..cfg()
        };
        let chat = HttpChat::with_transport(config, flaky.clone(), Arc::new(VirtualClock::new())).unwrap();
        let err = chat.complete("hi", &ChatParams::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Provider(ProviderError::Exhausted { attempts: 3, .. })
        ));
        assert_eq!(flaky.attempts(), 3);
        assert_eq!(err.exit_code(), 4);
    }
}
