use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CompletionProvider, CompletionRequest, CompletionResult, LlmError};

fn push_field(out: &mut String, field: &str) {
    out.push_str(&field.len().to_string());
    out.push(':');
    out.push_str(field);
    out.push('|');
}

/// Unambiguous encoding of every field that identifies a completion.
///
/// Each text field is length-prefixed, so no two distinct field tuples share
/// an encoding. `max_tokens` is deliberately left out.
pub fn cache_key_material(provider_name: &str, request: &CompletionRequest) -> String {
    let mut out = String::new();
    push_field(&mut out, provider_name);
    push_field(&mut out, &request.model_name);
    push_field(&mut out, &format!("{:016x}", request.temperature.to_bits()));
    match &request.system_text {
        None => out.push_str("N|"),
        Some(s) => {
            out.push('S');
            push_field(&mut out, s);
        }
    }
    push_field(&mut out, &request.user_text);
    out
}

/// SHA-256 hex digest of [`cache_key_material`].
pub fn cache_key(provider_name: &str, request: &CompletionRequest) -> String {
    hex::encode(Sha256::digest(cache_key_material(provider_name, request).as_bytes()))
}

pub trait CacheStore: Send + Sync {
    fn get(&self, key: &str) -> io::Result<Option<String>>;
    fn put(&self, key: &str, value: &str) -> io::Result<()>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    entries: Mutex<HashMap<String, String>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl CacheStore for MemoryStore {
    fn get(&self, key: &str) -> io::Result<Option<String>> {
        Ok(self
            .entries
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(key)
            .cloned())
    }

    fn put(&self, key: &str, value: &str) -> io::Result<()> {
        self.entries
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key.to_string(), value.to_string());
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    text: String,
}

/// Append-only JSON-lines cache that survives across runs.
pub struct FileStore {
    path: PathBuf,
    state: Mutex<(HashMap<String, String>, File)>,
}

impl FileStore {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(l) => {
                        entries.insert(l.key, l.text);
                    }
                    Err(e) => log::warn!("{}:{}: skipping bad cache line: {e}", path.display(), i + 1),
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(FileStore {
            path,
            state: Mutex::new((entries, file)),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl CacheStore for FileStore {
    fn get(&self, key: &str) -> io::Result<Option<String>> {
        let state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        Ok(state.0.get(key).cloned())
    }

    fn put(&self, key: &str, value: &str) -> io::Result<()> {
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let line = serde_json::to_string(&CacheLine {
            key: key.to_string(),
            text: value.to_string(),
        })?;
        writeln!(state.1, "{line}")?;
        state.1.flush()?;
        state.0.insert(key.to_string(), value.to_string());
        Ok(())
    }
}

/// Memoizes an inner provider. Store failures are logged and never fail the call.
pub struct CachedProvider {
    inner: Arc<dyn CompletionProvider>,
    store: Arc<dyn CacheStore>,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    inner_calls: AtomicUsize,
    hits: AtomicUsize,
    store_warnings: AtomicUsize,
}

impl CachedProvider {
    pub fn new(inner: Arc<dyn CompletionProvider>, store: Arc<dyn CacheStore>) -> Self {
        CachedProvider {
            inner,
            store,
            key_locks: Mutex::new(HashMap::new()),
            inner_calls: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
            store_warnings: AtomicUsize::new(0),
        }
    }

    pub fn in_memory(inner: Arc<dyn CompletionProvider>) -> Self {
        Self::new(inner, Arc::new(MemoryStore::new()))
    }

    /// Completions that reached the inner provider.
    pub fn inner_calls(&self) -> usize {
        self.inner_calls.load(Ordering::SeqCst)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Store reads or writes that failed and were degraded to pass-through.
    pub fn store_warnings(&self) -> usize {
        self.store_warnings.load(Ordering::SeqCst)
    }

    fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.key_locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(key.to_string()).or_default().clone()
    }

    fn warn(&self, what: &str, err: io::Error) {
        self.store_warnings.fetch_add(1, Ordering::SeqCst);
        log::warn!("completion cache {what} failed, continuing without cache: {err}");
    }
}

impl CompletionProvider for CachedProvider {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        request.validate()?;
        let key = cache_key(self.inner.name(), request);
        let key_lock = self.lock_for(&key);
        let _guard = key_lock.lock().unwrap_or_else(|e| e.into_inner());

        match self.store.get(&key) {
            Ok(Some(text)) => {
                self.hits.fetch_add(1, Ordering::SeqCst);
                return Ok(CompletionResult {
                    text,
                    provider_name: self.inner.name().to_string(),
                    cached: true,
                    latency_ms: 0,
                });
            }
            Ok(None) => {}
            Err(e) => self.warn("read", e),
        }

        self.inner_calls.fetch_add(1, Ordering::SeqCst);
        let result = self.inner.complete(request)?;
        if let Err(e) = self.store.put(&key, &result.text) {
            self.warn("write", e);
        }
        Ok(result)
    }
}
