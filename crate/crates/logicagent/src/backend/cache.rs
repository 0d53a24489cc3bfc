use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, Completion, CompletionRequest};

/// Content-addressed response cache in front of another backend. The key
/// covers model, temperature, prompt and the `template`/`template_version`
/// tags, so editing a prompt invalidates its entries.
pub struct FileCache<B> {
    inner: B,
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub bytes: u64,
}

impl<B: Backend> FileCache<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(FileCache { inner, dir, hits: AtomicU64::new(0), misses: AtomicU64::new(0) })
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::SeqCst)
    }

    fn key(req: &CompletionRequest) -> String {
        let mut h = Sha256::new();
        for part in [
            req.model.as_str(),
            &format!("{:?}", req.temperature),
            req.tags.get("template").map_or("", String::as_str),
            req.tags.get("template_version").map_or("", String::as_str),
            req.prompt.as_str(),
        ] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }

    fn store(&self, path: &Path, c: &Completion) -> io::Result<()> {
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(c).map_err(io::Error::other)?)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    }
}

impl<B: Backend> Backend for FileCache<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let path = self.dir.join(format!("{}.json", Self::key(req)));
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(c) = serde_json::from_slice::<Completion>(&bytes) {
                self.hits.fetch_add(1, Ordering::SeqCst);
                return Ok(c);
            }
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let c = self.inner.complete(req)?;
        if let Err(e) = self.store(&path, &c) {
            log::warn!("cache write to {} failed: {e}", path.display());
        }
        Ok(c)
    }
}

pub fn cache_stats(dir: &Path) -> io::Result<CacheStats> {
    let mut stats = CacheStats { entries: 0, bytes: 0 };
    if !dir.exists() {
        return Ok(stats);
    }
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.path().extension().is_some_and(|e| e == "json") {
            stats.entries += 1;
            stats.bytes += entry.metadata()?.len();
        }
    }
    Ok(stats)
}

/// Removes cached responses; returns how many were deleted.
pub fn cache_clear(dir: &Path) -> io::Result<usize> {
    let mut n = 0;
    if !dir.exists() {
        return Ok(0);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            fs::remove_file(path)?;
            n += 1;
        }
    }
    Ok(n)
}
