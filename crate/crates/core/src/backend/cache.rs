use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, CompletionBackend, CompletionRequest, RawResponse};
use crate::seeding::sha256_hex;

const MAGIC: &str = "rpt-cache v1 ";

/// Hash of (model name, temperature, sample index, prompt).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn new(model_name: &str, temperature: f64, sample: u32, prompt: &str) -> Self {
        let mut h = Sha256::new();
        for part in [model_name.as_bytes(), &temperature.to_bits().to_le_bytes(), &sample.to_le_bytes(), prompt.as_bytes()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part);
        }
        CacheKey(hex::encode(h.finalize()))
    }

    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub text: String,
    pub completion_tokens: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: String,
    temperature: f64,
    sample: u32,
    completion_tokens: Option<u64>,
    text_len: usize,
    text_sha256: String,
}

/// One file per key under a directory. Writes go through a temporary file
/// and an atomic rename, so readers never see a partial entry.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, BackendError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| BackendError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.as_hex())
    }

    /// Stored entry, or `None` when absent or unreadable.
    pub fn load(&self, key: &CacheKey) -> Option<CacheEntry> {
        let path = self.path_for(key);
        let raw = fs::read_to_string(&path).ok()?;
        match decode(&raw) {
            Some(entry) => Some(entry),
            None => {
                log::warn!("ignoring corrupt cache entry {}", path.display());
                None
            }
        }
    }

    pub fn store(
        &self,
        key: &CacheKey,
        model: &str,
        temperature: f64,
        sample: u32,
        entry: &CacheEntry,
    ) -> Result<(), BackendError> {
        let header = Header {
            model: model.to_string(),
            temperature,
            sample,
            completion_tokens: entry.completion_tokens,
            text_len: entry.text.len(),
            text_sha256: sha256_hex(entry.text.as_bytes()),
        };
        let header = serde_json::to_string(&header).map_err(|e| BackendError::Cache(e.to_string()))?;
        let err = |e: std::io::Error| BackendError::Cache(format!("{}: {e}", self.dir.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(err)?;
        write!(tmp, "{MAGIC}{header}\n{}", entry.text).map_err(err)?;
        tmp.as_file().sync_all().map_err(err)?;
        tmp.persist(self.path_for(key)).map_err(|e| err(e.error))?;
        Ok(())
    }

    /// Number of entries on disk.
    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| rd.filter_map(Result::ok).filter(|e| e.file_name().len() == 64).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn decode(raw: &str) -> Option<CacheEntry> {
    let rest = raw.strip_prefix(MAGIC)?;
    let (header, text) = rest.split_once('\n')?;
    let header: Header = serde_json::from_str(header).ok()?;
    (text.len() == header.text_len && sha256_hex(text.as_bytes()) == header.text_sha256)
        .then(|| CacheEntry { text: text.to_string(), completion_tokens: header.completion_tokens })
}

/// Wraps a backend with a [`ResponseCache`]. Misses for the same key are
/// serialized so each key reaches the inner backend at most once.
pub struct CachedBackend<B> {
    inner: B,
    cache: ResponseCache,
    model_name: String,
    key_locks: Mutex<HashMap<CacheKey, Arc<Mutex<()>>>>,
    misses: AtomicU64,
}

impl<B: CompletionBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: ResponseCache, model_name: impl Into<String>) -> Self {
        CachedBackend {
            inner,
            cache,
            model_name: model_name.into(),
            key_locks: Mutex::new(HashMap::new()),
            misses: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    /// Calls forwarded to the inner backend.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::SeqCst)
    }

    fn lock_for(&self, key: &CacheKey) -> Arc<Mutex<()>> {
        let mut locks = self.key_locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(key.clone()).or_default().clone()
    }
}

impl<B: CompletionBackend> CompletionBackend for CachedBackend<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        let started = Instant::now();
        let key = CacheKey::new(&self.model_name, request.temperature, request.sample, &request.prompt);
        let hit = |entry: CacheEntry| RawResponse {
            text: entry.text,
            reported_completion_tokens: entry.completion_tokens,
            latency: started.elapsed(),
            from_cache: true,
        };
        if let Some(entry) = self.cache.load(&key) {
            return Ok(hit(entry));
        }
        let lock = self.lock_for(&key);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(entry) = self.cache.load(&key) {
            return Ok(hit(entry));
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let response = self.inner.complete(request)?;
        let entry = CacheEntry { text: response.text.clone(), completion_tokens: response.reported_completion_tokens };
        self.cache.store(&key, &self.model_name, request.temperature, request.sample, &entry)?;
        Ok(response)
    }
}
