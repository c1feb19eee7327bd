use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{ChunkConfig, TokenBounds};
use crate::error::{Error, Result};
use crate::generator::{GenerationConfig, TemplateSet};
use crate::providers::mock::{HashEmbedder, TokenOverlapReranker};
use crate::providers::simulated::SimulatedChat;
use crate::providers::{
    ChatProvider, Embedder, HttpChat, HttpEmbedder, HttpReranker, HttpTransport, ProviderConfig, RecordingTransport,
    ReplayTransport, Reranker, Role, SystemClock, Transport,
};
use crate::qc::QcConfig;
use crate::tokenize::{tokenizer_by_name, TokenizerRef, DEFAULT_TOKENIZER};
use crate::types::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Remote services over HTTP.
    Http,
    /// HTTP, with every exchange appended to a transcript.
    Record,
    /// Answers from a recorded transcript; no network.
    Replay,
    /// Offline rule-based stand-ins.
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankerEntry {
    pub id: String,
    #[serde(flatten)]
    pub config: ProviderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProvidersConfig {
    pub kind: ProviderKind,
    /// Directory of per-role transcripts for `record` and `replay`.
    pub transcript: Option<PathBuf>,
    pub chat: ProviderConfig,
    pub embed: ProviderConfig,
    pub rerankers: Vec<RerankerEntry>,
}

impl Default for ProvidersConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Simulated,
            transcript: None,
            chat: ProviderConfig::for_role(Role::Chat),
            embed: ProviderConfig::for_role(Role::Embed),
            rerankers: vec![RerankerEntry {
                id: "reranker".into(),
                config: ProviderConfig::for_role(Role::Rerank),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub task: Task,
    pub tokenizer: String,
    pub seed: u64,
    pub workers: usize,
    pub bounds: TokenBounds,
    pub chunk: ChunkConfig,
    pub generation: GenerationConfig,
    pub qc: QcConfig,
    pub providers: ProvidersConfig,
    pub templates_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::for_task(Task::Qa)
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub provider: Option<ProviderKind>,
    pub transcript: Option<PathBuf>,
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl PipelineConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            task,
            tokenizer: DEFAULT_TOKENIZER.into(),
            seed: 42,
            workers: 8,
            bounds: TokenBounds::default(),
            chunk: ChunkConfig::default(),
            generation: GenerationConfig::new(task),
            qc: QcConfig {
                task,
                ..QcConfig::default()
            },
            providers: ProvidersConfig::default(),
            templates_dir: None,
        }
    }

    /// Task defaults, then the JSON file, then `overrides`. The top-level
    /// seed and worker count are copied into the stage configs.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let file: Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
                serde_json::from_str(&text)?
            }
            None => Value::Object(Default::default()),
        };
        if !file.is_object() {
            return Err(Error::config("config file must hold a JSON object"));
        }
        let task = match overrides.task {
            Some(t) => t,
            None => match file.get("task") {
                Some(v) => serde_json::from_value(v.clone())?,
                None => Task::Qa,
            },
        };
        let mut merged = serde_json::to_value(Self::for_task(task))?;
        merge(&mut merged, file);
        let mut cfg: Self = serde_json::from_value(merged)?;
        cfg.task = task;
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(w) = overrides.workers {
            cfg.workers = w;
        }
        if let Some(k) = overrides.provider {
            cfg.providers.kind = k;
        }
        if let Some(t) = &overrides.transcript {
            cfg.providers.transcript = Some(t.clone());
        }
        cfg.generation.task = task;
        cfg.generation.rng_seed = cfg.seed;
        cfg.generation.workers = cfg.workers;
        cfg.qc.task = task;
        cfg.qc.split_seed = cfg.seed;
        cfg.qc.workers = cfg.workers;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::config("workers must be positive"));
        }
        tokenizer_by_name(&self.tokenizer)?;
        self.bounds.validate()?;
        self.chunk.validate()?;
        self.generation.validate()?;
        self.qc.validate()?;
        if matches!(self.providers.kind, ProviderKind::Record | ProviderKind::Replay)
            && self.providers.transcript.is_none()
        {
            return Err(Error::config("record and replay providers need a transcript directory"));
        }
        Ok(())
    }

    pub fn tokenizer(&self) -> Result<TokenizerRef> {
        tokenizer_by_name(&self.tokenizer)
    }

    pub fn templates(&self) -> Result<TemplateSet> {
        match &self.templates_dir {
            Some(dir) => TemplateSet::load_dir(dir),
            None => Ok(TemplateSet::builtin()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

pub struct Providers {
    pub chat: Box<dyn ChatProvider>,
    pub embedder: Box<dyn Embedder>,
    pub rerankers: Vec<Box<dyn Reranker>>,
}

impl Providers {
    pub fn reranker_refs(&self) -> Vec<&dyn Reranker> {
        self.rerankers.iter().map(|r| r.as_ref()).collect()
    }
}

pub const SIMULATED_RERANKERS: usize = 3;

fn transcript_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.jsonl"))
}

fn transport_for(config: &ProvidersConfig, role: &ProviderConfig, name: &str) -> Result<Arc<dyn Transport>> {
    let http = || -> Arc<dyn Transport> {
        Arc::new(HttpTransport::new(
            &role.base_url,
            role.api_key.expose().map(str::to_string),
            role.timeout(),
        ))
    };
    let dir = config.transcript.as_deref();
    Ok(match (config.kind, dir) {
        (ProviderKind::Replay, Some(dir)) => Arc::new(ReplayTransport::from_file(transcript_file(dir, name))?),
        (ProviderKind::Record, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
            Arc::new(RecordingTransport::with_sink(http(), transcript_file(dir, name))?)
        }
        _ => http(),
    })
}

/// Builds clients for every role. Environment variables override the file's
/// HTTP settings.
pub fn build_providers(config: &ProvidersConfig) -> Result<Providers> {
    if config.kind == ProviderKind::Simulated {
        return Ok(Providers {
            chat: Box::new(SimulatedChat),
            embedder: Box::new(HashEmbedder::default()),
            rerankers: (0..SIMULATED_RERANKERS)
                .map(|i| Box::new(TokenOverlapReranker::new(format!("sim-{i}")).with_jitter(0.05)) as Box<dyn Reranker>)
                .collect(),
        });
    }
    if config.rerankers.is_empty() {
        return Err(Error::config("at least one reranker must be configured"));
    }
    let env = |k: &str| std::env::var(k).ok();
    let clock = || Arc::new(SystemClock::default());
    let mut chat = config.chat.clone();
    chat.apply_env(Role::Chat, env)?;
    let mut embed = config.embed.clone();
    embed.apply_env(Role::Embed, env)?;
    let chat = HttpChat::with_transport(chat.clone(), transport_for(config, &chat, "chat")?, clock())?;
    let embedder = HttpEmbedder::with_transport(embed.clone(), transport_for(config, &embed, "embed")?, clock())?;
    let mut rerankers: Vec<Box<dyn Reranker>> = Vec::new();
    for entry in &config.rerankers {
        let mut rc = entry.config.clone();
        rc.apply_env(Role::Rerank, env)?;
        let transport = transport_for(config, &rc, &format!("rerank-{}", entry.id))?;
        rerankers.push(Box::new(HttpReranker::with_transport(
            entry.id.clone(),
            rc,
            transport,
            clock(),
        )?));
    }
    Ok(Providers {
        chat: Box::new(chat),
        embedder: Box::new(embedder),
        rerankers,
    })
}
