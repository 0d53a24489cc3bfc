use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Backend, BackendError, Completion, CompletionRequest};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Base URL such as `https://api.openai.com/v1`, or the full
    /// chat/completions URL.
    pub endpoint: String,
    pub api_key: Option<String>,
    /// Extra attempts after the first one.
    pub retries: u32,
    pub timeout: Duration,
    pub backoff: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "https://api.openai.com/v1".into(),
            api_key: None,
            retries: 2,
            timeout: Duration::from_secs(120),
            backoff: Duration::from_millis(500),
        }
    }
}

/// OpenAI-compatible chat/completions client.
pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    cfg: HttpConfig,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

enum Attempt {
    Done(Completion),
    Retry(String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(cfg: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let base = cfg.endpoint.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") { base.to_string() } else { format!("{base}/chat/completions") };
        HttpBackend { agent, url, cfg }
    }

    fn attempt(&self, req: &CompletionRequest) -> Attempt {
        let body = json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let mut call = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.cfg.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match call.send_json(&body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        if status == 401 || status == 403 {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Attempt::Fatal(BackendError::Auth(format!("HTTP {status}: {text}")));
        }
        if status == 429 || status >= 500 {
            return Attempt::Retry(format!("HTTP {status}"));
        }
        if !(200..300).contains(&status) {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Attempt::Fatal(BackendError::Transport { attempts: 1, message: format!("HTTP {status}: {text}") });
        }
        let parsed: ChatResponse = match resp.body_mut().read_json() {
            Ok(p) => p,
            Err(e) => return Attempt::Fatal(BackendError::Malformed(e.to_string())),
        };
        let Some(text) = parsed.choices.into_iter().next().and_then(|c| c.message.content) else {
            return Attempt::Fatal(BackendError::Malformed("no message content".into()));
        };
        Attempt::Done(match parsed.usage {
            Some(u) => Completion { text, prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens },
            None => Completion::estimated(&req.prompt, text),
        })
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let mut last = String::new();
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                let wait = self.cfg.backoff.saturating_mul(1 << (attempt - 1).min(6));
                thread::sleep(wait.min(Duration::from_secs(30)));
            }
            match self.attempt(req) {
                Attempt::Done(c) => return Ok(c),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(msg) => {
                    log::warn!("request to {} failed (attempt {}): {msg}", self.url, attempt + 1);
                    last = msg;
                }
            }
        }
        Err(BackendError::Transport { attempts: self.cfg.retries + 1, message: last })
    }
}
