//! JSON-over-HTTP transport plus transcript recording and replay.
//!
//! Requests are fingerprinted by hashing the endpoint path together with the
//! request body serialized with recursively sorted keys, so the same logical
//! request always maps to the same recorded response regardless of host or
//! field order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, ProviderError, Result};

pub trait Transport: Send + Sync {
    /// POSTs `body` to `path` (relative to the transport's base URL).
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError>;
}

/// Blocking HTTP transport.
pub struct HttpTransport {
    agent: ureq::Agent,
    base_url: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(base_url: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self {
            agent: config.into(),
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
        }
    }
}

fn classify_status(status: u16, message: String) -> ProviderError {
    if status == 429 || status >= 500 {
        ProviderError::Transient {
            status: Some(status),
            message,
        }
    } else {
        ProviderError::Status { status, message }
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let url = format!("{}/{}", self.base_url, path.trim_start_matches('/'));
        let mut req = self.agent.post(&url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| ProviderError::Transient {
            status: None,
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(classify_status(status, text));
        }
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| ProviderError::Contract(format!("response is not JSON: {e}")))
    }
}

fn canonicalize(v: &Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k.clone(), canonicalize(v))).collect())
        }
        Value::Array(items) => Value::Array(items.iter().map(canonicalize).collect()),
        other => other.clone(),
    }
}

/// Hex SHA-256 of the normalized request.
pub fn fingerprint(path: &str, body: &Value) -> String {
    let normalized = serde_json::json!({
        "path": path.trim_start_matches('/'),
        "body": canonicalize(body),
    });
    let mut hasher = Sha256::new();
    hasher.update(canonicalize(&normalized).to_string().as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub response: Value,
}

/// Ordered record of (fingerprint, response) pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
        }
        Ok(Self { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = File::create(path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        for entry in &self.entries {
            serde_json::to_writer(&mut w, entry)?;
            w.write_all(b"\n").map_err(|e| Error::io("writing transcript", e))?;
        }
        w.flush().map_err(|e| Error::io("writing transcript", e))
    }
}

/// Answers requests from a transcript; never touches the network.
pub struct ReplayTransport {
    responses: HashMap<String, Value>,
}

impl ReplayTransport {
    pub fn new(transcript: &Transcript) -> Self {
        let mut responses = HashMap::new();
        for entry in &transcript.entries {
            responses
                .entry(entry.fingerprint.clone())
                .or_insert_with(|| entry.response.clone());
        }
        Self { responses }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(&Transcript::read(path)?))
    }
}

impl Transport for ReplayTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let fp = fingerprint(path, body);
        self.responses.get(&fp).cloned().ok_or(ProviderError::NotRecorded(fp))
    }
}

/// Forwards to an inner transport and records every successful exchange.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    recorded: Mutex<Transcript>,
    sink: Option<Mutex<BufWriter<File>>>,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> Self {
        Self {
            inner,
            recorded: Mutex::new(Transcript::default()),
            sink: None,
        }
    }

    /// Also appends each exchange to `path` as it happens.
    pub fn with_sink(inner: Arc<dyn Transport>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(Self {
            sink: Some(Mutex::new(BufWriter::new(file))),
            ..Self::new(inner)
        })
    }

    pub fn transcript(&self) -> Transcript {
        self.recorded.lock().unwrap().clone()
    }
}

impl Transport for RecordingTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let response = self.inner.post_json(path, body)?;
        let entry = TranscriptEntry {
            fingerprint: fingerprint(path, body),
            response: response.clone(),
        };
        if let Some(sink) = &self.sink {
            let mut w = sink.lock().unwrap();
            let line = serde_json::to_string(&entry).expect("json values always serialize");
            let _ = writeln!(w, "{line}").and_then(|_| w.flush()).map_err(|e| {
                tracing::warn!(error = %e, "failed to append transcript entry");
            });
        }
        self.recorded.lock().unwrap().entries.push(entry);
        Ok(response)
    }
}
