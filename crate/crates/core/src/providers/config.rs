use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::retry::RetryPolicy;
use crate::error::{Error, Result};

/// Which model service a client talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Chat,
    Embed,
    Rerank,
}

impl Role {
    fn env_prefix(self) -> &'static str {
        match self {
            Role::Chat => "AIRBENCH_CHAT_",
            Role::Embed => "AIRBENCH_EMBED_",
            Role::Rerank => "AIRBENCH_RERANK_",
        }
    }
}

/// API key held in memory only; never serialized or printed.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Secret(Option<String>);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Secret(Some(value.into()))
    }

    pub fn expose(&self) -> Option<&str> {
        self.0.as_deref()
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.is_some() {
            "Secret(***)"
        } else {
            "Secret(None)"
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub base_url: String,
    #[serde(skip)]
    pub api_key: Secret,
    /// Name of an environment variable holding the key, for config files.
    pub api_key_env: Option<String>,
    pub model_name: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_initial_ms: u64,
    pub backoff_multiplier: f64,
    pub rate_limit_per_minute: u32,
    pub max_input_tokens: usize,
    pub max_concurrency: usize,
    pub batch_size: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000/v1".into(),
            api_key: Secret::default(),
            api_key_env: None,
            model_name: String::new(),
            timeout_secs: 60,
            max_retries: 3,
            backoff_initial_ms: 500,
            backoff_multiplier: 2.0,
            rate_limit_per_minute: 600,
            max_input_tokens: 512,
            max_concurrency: 8,
            batch_size: 64,
        }
    }
}

impl ProviderConfig {
    /// Defaults for a role. Chat prompts embed whole documents, so the chat
    /// role gets a much larger input budget than embedding and reranking.
    pub fn for_role(role: Role) -> Self {
        let base = Self::default();
        match role {
            Role::Chat => Self {
                max_input_tokens: 32_768,
                ..base
            },
            Role::Embed | Role::Rerank => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rate_limit_per_minute == 0 {
            return Err(Error::config("rate_limit_per_minute must be positive"));
        }
        if self.max_input_tokens == 0 || self.batch_size == 0 || self.max_concurrency == 0 {
            return Err(Error::config(
                "max_input_tokens, batch_size and max_concurrency must be positive",
            ));
        }
        if self.backoff_multiplier.is_nan() || self.backoff_multiplier < 1.0 {
            return Err(Error::config("backoff_multiplier must be at least 1"));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            initial_backoff: Duration::from_millis(self.backoff_initial_ms),
            multiplier: self.backoff_multiplier,
        }
    }

    /// Applies environment overrides. Shared `AIRBENCH_API_BASE` /
    /// `AIRBENCH_API_KEY` are read first, then role-specific
    /// `AIRBENCH_<ROLE>_API_BASE`, `_API_KEY`, `_MODEL`, `_TIMEOUT_SECS`,
    /// `_MAX_RETRIES`, `_RATE_LIMIT`, `_MAX_INPUT_TOKENS`.
    pub fn apply_env(&mut self, role: Role, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        let p = role.env_prefix();
        if let Some(v) = lookup("AIRBENCH_API_BASE") {
            self.base_url = v;
        }
        if let Some(v) = lookup("AIRBENCH_API_KEY") {
            self.api_key = Secret::new(v);
        }
        if let Some(var) = &self.api_key_env {
            if let Some(v) = lookup(var) {
                self.api_key = Secret::new(v);
            }
        }
        if let Some(v) = lookup(&format!("{p}API_BASE")) {
            self.base_url = v;
        }
        if let Some(v) = lookup(&format!("{p}API_KEY")) {
            self.api_key = Secret::new(v);
        }
        if let Some(v) = lookup(&format!("{p}MODEL")) {
            self.model_name = v;
        }
        let num = |name: &str| -> Result<Option<u64>> {
            lookup(&format!("{p}{name}"))
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| Error::config(format!("{p}{name} must be an integer, got `{v}`")))
                })
                .transpose()
        };
        if let Some(v) = num("TIMEOUT_SECS")? {
            self.timeout_secs = v;
        }
        if let Some(v) = num("MAX_RETRIES")? {
            self.max_retries = v as u32;
        }
        if let Some(v) = num("RATE_LIMIT")? {
            self.rate_limit_per_minute = v as u32;
        }
        if let Some(v) = num("MAX_INPUT_TOKENS")? {
            self.max_input_tokens = v as usize;
        }
        self.validate()
    }

    pub fn from_env(role: Role) -> Result<Self> {
        let mut cfg = Self::for_role(role);
        cfg.apply_env(role, |k| std::env::var(k).ok())?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn role_overrides_win_over_shared_settings() {
        let env: HashMap<&str, &str> = [
            ("AIRBENCH_API_BASE", "https://shared/v1"),
            ("AIRBENCH_API_KEY", "shared-key"),
            ("AIRBENCH_EMBED_API_BASE", "https://embed/v1"),
            ("AIRBENCH_EMBED_MODEL", "bge"),
            ("AIRBENCH_EMBED_RATE_LIMIT", "30"),
        ]
        .into_iter()
        .collect();
        let lookup = |k: &str| env.get(k).map(|v| v.to_string());

        let mut embed = ProviderConfig::for_role(Role::Embed);
        embed.apply_env(Role::Embed, lookup).unwrap();
        assert_eq!(embed.base_url, "https://embed/v1");
        assert_eq!(embed.model_name, "bge");
        assert_eq!(embed.rate_limit_per_minute, 30);
        assert_eq!(embed.api_key.expose(), Some("shared-key"));
        assert_eq!(embed.max_input_tokens, 512);

        let mut chat = ProviderConfig::for_role(Role::Chat);
        chat.apply_env(Role::Chat, lookup).unwrap();
        assert_eq!(chat.base_url, "https://shared/v1");
    }

    #[test]
    fn key_never_serialized_or_debug_printed() {
        let cfg = ProviderConfig {
            api_key: Secret::new("sk-very-secret"),
            ..Default::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(!json.contains("sk-very-secret"));
        assert!(!format!("{cfg:?}").contains("sk-very-secret"));
    }

    #[test]
    fn key_from_named_variable() {
        let mut cfg = ProviderConfig {
            api_key_env: Some("MY_KEY".into()),
            ..Default::default()
        };
        cfg.apply_env(Role::Chat, |k| (k == "MY_KEY").then(|| "abc".to_string()))
            .unwrap();
        assert_eq!(cfg.api_key.expose(), Some("abc"));
    }

    #[test]
    fn rejects_zero_rate_limit_and_bad_numbers() {
        let mut cfg = ProviderConfig::default();
        assert!(cfg
            .apply_env(Role::Rerank, |k| (k == "AIRBENCH_RERANK_RATE_LIMIT")
                .then(|| "0".into()))
            .is_err());
        let mut cfg = ProviderConfig::default();
        assert!(cfg
            .apply_env(Role::Rerank, |k| (k == "AIRBENCH_RERANK_MAX_RETRIES")
                .then(|| "many".into()))
            .is_err());
    }
}
