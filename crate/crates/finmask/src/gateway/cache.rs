//! Content-addressed completion cache. The key is derived from the model
//! name, the full rendered prompt, and the attempt ordinal, so retries after
//! malformed output are distinct entries and a warm rerun replays the exact
//! transcript without touching the transport.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache entry {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// One cached completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub attempt: u32,
    pub completion: String,
}

pub struct CompletionCache {
    dir: PathBuf,
}

impl CompletionCache {
    pub fn new(dir: impl Into<PathBuf>) -> CompletionCache {
        CompletionCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// sha256 over model, prompt, and attempt with 0x1F separators (the
    /// separator keeps `("ab", "c")` and `("a", "bc")` distinct).
    pub fn key(model: &str, prompt: &str, attempt: u32) -> String {
        let mut hasher = Sha256::new();
        hasher.update(model.as_bytes());
        hasher.update([0x1f]);
        hasher.update(prompt.as_bytes());
        hasher.update([0x1f]);
        hasher.update(attempt.to_le_bytes());
        hex::encode(hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        // Two-level fanout keeps directories small on big benchmarks.
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, CacheError> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CacheError::Io { path, source: e }),
        };
        let entry: CacheEntry = serde_json::from_slice(&bytes)
            .map_err(|e| CacheError::Corrupt { path, message: e.to_string() })?;
        Ok(Some(entry))
    }

    /// Writes via a temp file + rename so concurrent readers never observe a
    /// partial entry.
    pub fn put(&self, key: &str, entry: &CacheEntry) -> Result<(), CacheError> {
        let path = self.path_for(key);
        let parent = path.parent().expect("cache path has parent").to_path_buf();
        fs::create_dir_all(&parent)
            .map_err(|e| CacheError::Io { path: parent.clone(), source: e })?;
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec_pretty(entry).expect("cache entry serializes");
        {
            let mut file = fs::File::create(&tmp)
                .map_err(|e| CacheError::Io { path: tmp.clone(), source: e })?;
            file.write_all(&body)
                .map_err(|e| CacheError::Io { path: tmp.clone(), source: e })?;
            file.sync_all().map_err(|e| CacheError::Io { path: tmp.clone(), source: e })?;
        }
        fs::rename(&tmp, &path).map_err(|e| CacheError::Io { path, source: e })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_separator_prevents_concatenation_collisions() {
        assert_ne!(
            CompletionCache::key("ab", "c", 1),
            CompletionCache::key("a", "bc", 1)
        );
        assert_ne!(
            CompletionCache::key("m", "p", 1),
            CompletionCache::key("m", "p", 2)
        );
        assert_eq!(
            CompletionCache::key("m", "p", 1),
            CompletionCache::key("m", "p", 1)
        );
    }

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CompletionCache::new(dir.path());
        let key = CompletionCache::key("stub", "hello", 1);
        assert!(cache.get(&key).unwrap().is_none());
        let entry = CacheEntry {
            model: "stub".into(),
            attempt: 1,
            completion: "{\"answer\": \"42\"}".into(),
        };
        cache.put(&key, &entry).unwrap();
        assert_eq!(cache.get(&key).unwrap(), Some(entry));
    }

    #[test]
    fn corrupt_entry_is_reported_not_silently_missed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CompletionCache::new(dir.path());
        let key = CompletionCache::key("stub", "hello", 1);
        let entry = CacheEntry { model: "stub".into(), attempt: 1, completion: "x".into() };
        cache.put(&key, &entry).unwrap();
        let path = dir.path().join(&key[..2]).join(format!("{key}.json"));
        fs::write(&path, b"not json").unwrap();
        assert!(matches!(cache.get(&key), Err(CacheError::Corrupt { .. })));
    }
}
