//! Completion backends.

mod cache;
mod http;
mod scripted;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{cache_clear, cache_stats, CacheStats, FileCache};
pub use http::{HttpBackend, HttpConfig};
pub use scripted::{Recorder, ScriptEntry, ScriptedBackend};

pub const DEFAULT_TOKEN_BUDGET: u64 = 64_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
    /// Routing labels such as stage, position, instance and attempt.
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest { prompt: prompt.into(), temperature: 0.0, max_tokens: 2048, model: model.into(), tags: BTreeMap::new() }
    }

    pub fn tag(mut self, key: &str, value: impl ToString) -> Self {
        self.tags.insert(key.to_string(), value.to_string());
        self
    }

    /// sha256 over model, temperature and prompt.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.model.as_bytes());
        h.update([0]);
        h.update(format!("{:?}", self.temperature).as_bytes());
        h.update([0]);
        h.update(self.prompt.as_bytes());
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Completion {
    /// Token counts estimated at four characters per token when the backend
    /// reports none.
    pub fn estimated(prompt: &str, text: impl Into<String>) -> Self {
        let text = text.into();
        Completion { prompt_tokens: estimate_tokens(prompt), completion_tokens: estimate_tokens(&text), text }
    }
}

pub fn estimate_tokens(s: &str) -> u64 {
    s.chars().count().div_ceil(4) as u64
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("token budget exceeded: {used} of {limit}")]
    BudgetExceeded { used: u64, limit: u64 },
    #[error("no scripted response for {0}")]
    NoScript(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        (**self).complete(req)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        (**self).complete(req)
    }
}

/// Per-instance token meter. A call is refused once the total reaches the
/// limit; the call that crosses it still completes.
#[derive(Debug)]
pub struct TokenBudget {
    limit: u64,
    used: AtomicU64,
}

impl TokenBudget {
    pub fn new(limit: u64) -> Self {
        TokenBudget { limit, used: AtomicU64::new(0) }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    pub fn complete(&self, backend: &dyn Backend, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let used = self.used();
        if used >= self.limit {
            return Err(BackendError::BudgetExceeded { used, limit: self.limit });
        }
        let c = backend.complete(req)?;
        self.used.fetch_add(c.prompt_tokens + c.completion_tokens, Ordering::SeqCst);
        Ok(c)
    }
}
