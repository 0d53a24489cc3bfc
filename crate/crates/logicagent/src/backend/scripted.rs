use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, Completion, CompletionRequest};

/// One replay line. An entry answers a request when its fingerprint equals
/// the request's, or when every tag in `tags` matches the request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tags: BTreeMap<String, String>,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_tokens: Option<u64>,
}

impl ScriptEntry {
    pub fn tagged(tags: &[(&str, &str)], response: impl Into<String>) -> Self {
        ScriptEntry {
            fingerprint: None,
            tags: tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            response: response.into(),
            prompt_tokens: None,
            completion_tokens: None,
        }
    }
}

/// Deterministic replay backend. Fingerprint matches win; otherwise the
/// tag entry with the most matching tags, earliest in the file on ties.
pub struct ScriptedBackend {
    entries: Vec<ScriptEntry>,
}

impl ScriptedBackend {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        ScriptedBackend { entries }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let reader = BufReader::new(File::open(path)?);
        let mut entries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(&line)
                .map_err(|e| BackendError::Malformed(format!("{}:{}: {e}", path.display(), n + 1)))?;
            entries.push(e);
        }
        Ok(ScriptedBackend { entries })
    }

    fn lookup(&self, req: &CompletionRequest) -> Option<&ScriptEntry> {
        let fp = req.fingerprint();
        if let Some(e) = self.entries.iter().find(|e| e.fingerprint.as_deref() == Some(fp.as_str())) {
            return Some(e);
        }
        let mut best: Option<&ScriptEntry> = None;
        for e in self.entries.iter().filter(|e| e.fingerprint.is_none()) {
            if !e.tags.iter().all(|(k, v)| req.tags.get(k) == Some(v)) {
                continue;
            }
            if best.is_none_or(|b| e.tags.len() > b.tags.len()) {
                best = Some(e);
            }
        }
        best
    }
}

impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let e = self.lookup(req).ok_or_else(|| {
            let tags: Vec<String> = req.tags.iter().map(|(k, v)| format!("{k}={v}")).collect();
            BackendError::NoScript(format!("[{}] {}", tags.join(" "), req.fingerprint()))
        })?;
        let mut c = Completion::estimated(&req.prompt, e.response.clone());
        c.prompt_tokens = e.prompt_tokens.unwrap_or(c.prompt_tokens);
        c.completion_tokens = e.completion_tokens.unwrap_or(c.completion_tokens);
        Ok(c)
    }
}

/// Wraps a backend and appends every answered request to a replay file.
pub struct Recorder<B> {
    inner: B,
    out: Mutex<File>,
}

impl<B: Backend> Recorder<B> {
    pub fn new(inner: B, path: &Path) -> Result<Self, BackendError> {
        let out = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Recorder { inner, out: Mutex::new(out) })
    }
}

impl<B: Backend> Backend for Recorder<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let c = self.inner.complete(req)?;
        let entry = ScriptEntry {
            fingerprint: Some(req.fingerprint()),
            tags: req.tags.clone(),
            response: c.text.clone(),
            prompt_tokens: Some(c.prompt_tokens),
            completion_tokens: Some(c.completion_tokens),
        };
        let line = serde_json::to_string(&entry).map_err(|e| BackendError::Malformed(e.to_string()))?;
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        writeln!(out, "{line}")?;
        Ok(c)
    }
}
