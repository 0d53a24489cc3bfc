//! TOML run configuration with environment overrides.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::AgentConfig;
use crate::backend::{Backend, BackendError, FileCache, HttpBackend, HttpConfig, Recorder, ScriptedBackend};

pub const ENV_ENDPOINT: &str = "LOGICAGENT_ENDPOINT";
pub const ENV_API_KEY: &str = "LOGICAGENT_API_KEY";
pub const ENV_MODEL: &str = "LOGICAGENT_MODEL";
/// Read when `LOGICAGENT_API_KEY` is unset.
pub const ENV_OPENAI_KEY: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    /// Replay file for the scripted backend.
    pub script: Option<PathBuf>,
    /// Append every answered request to this replay file.
    pub record: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub retries: u32,
    pub timeout_secs: u64,
    pub backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        let http = HttpConfig::default();
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: http.endpoint,
            api_key: None,
            script: None,
            record: None,
            cache_dir: None,
            retries: http.retries,
            timeout_secs: http.timeout.as_secs(),
            backoff_ms: http.backoff.as_millis() as u64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub backend: BackendConfig,
    pub agent: AgentConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("scripted backend needs a `script` file")]
    MissingScript,
    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl Config {
    /// Reads the file, resolves relative paths against its directory and
    /// applies environment overrides.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg: Config =
            toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.display().to_string(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.backend.script, &mut cfg.backend.record, &mut cfg.backend.cache_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.apply_env(|k| std::env::var(k).ok());
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(e) = get(ENV_ENDPOINT) {
            self.backend.endpoint = e;
        }
        if let Some(k) = get(ENV_API_KEY).or_else(|| get(ENV_OPENAI_KEY)) {
            self.backend.api_key = Some(k);
        }
        if let Some(m) = get(ENV_MODEL) {
            self.agent.model = m;
        }
    }

    /// Short digest of the effective configuration, credentials excluded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(json)[..8])
    }

    pub fn build_backend(&self) -> Result<Box<dyn Backend>, ConfigError> {
        let b = &self.backend;
        let mut backend: Box<dyn Backend> = match b.kind {
            BackendKind::Http => Box::new(HttpBackend::new(HttpConfig {
                endpoint: b.endpoint.clone(),
                api_key: b.api_key.clone(),
                retries: b.retries,
                timeout: Duration::from_secs(b.timeout_secs),
                backoff: Duration::from_millis(b.backoff_ms),
            })),
            BackendKind::Scripted => Box::new(ScriptedBackend::load(b.script.as_deref().ok_or(ConfigError::MissingScript)?)?),
        };
        if let Some(dir) = &b.cache_dir {
            backend = Box::new(FileCache::new(backend, dir).map_err(BackendError::from)?);
        }
        if let Some(path) = &b.record {
            backend = Box::new(Recorder::new(backend, path)?);
        }
        Ok(backend)
    }
}
