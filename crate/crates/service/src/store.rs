//! JSON files under a data directory: `sessions/`, `reports/`,
//! `idempotency/` and the append-only `feedback.jsonl`.

use crate::error::ServiceError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

pub const SESSIONS_DIR: &str = "sessions";
pub const REPORTS_DIR: &str = "reports";
pub const IDEMPOTENCY_DIR: &str = "idempotency";
pub const FEEDBACK_LOG: &str = "feedback.jsonl";

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

/// Ids become file names, so only a conservative alphabet is accepted.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        for dir in [SESSIONS_DIR, REPORTS_DIR, IDEMPOTENCY_DIR] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(|e| ServiceError::storage(&p, e))?;
        }
        Ok(Store {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn feedback_path(&self) -> PathBuf {
        self.root.join(FEEDBACK_LOG)
    }

    /// Exclusive lock for one named resource.
    pub fn lock(&self, name: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(name.to_string()).or_default().clone()
    }

    pub fn path(&self, dir: &str, id: &str) -> PathBuf {
        self.root.join(dir).join(format!("{id}.json"))
    }

    pub fn read<T: DeserializeOwned>(&self, dir: &str, id: &str) -> Result<Option<T>, ServiceError> {
        if !valid_id(id) {
            return Ok(None);
        }
        let path = self.path(dir, id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(ServiceError::storage(&path, e)),
        };
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| ServiceError::storage(&path, e))
    }

    /// Write to a temporary file, then rename over the target, so readers
    /// never observe a partial document.
    pub fn write<T: Serialize>(&self, dir: &str, id: &str, value: &T) -> Result<(), ServiceError> {
        if !valid_id(id) {
            return Err(ServiceError::Internal(format!("invalid id {id:?}")));
        }
        let path = self.path(dir, id);
        let tmp = path.with_extension(format!("json.tmp-{}", std::process::id()));
        let bytes = serde_json::to_vec_pretty(value).map_err(|e| ServiceError::storage(&path, e))?;
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| ServiceError::storage(&path, e))
    }

    pub fn list(&self, dir: &str) -> Result<Vec<String>, ServiceError> {
        let p = self.root.join(dir);
        let mut ids: Vec<String> = fs::read_dir(&p)
            .map_err(|e| ServiceError::storage(&p, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".json").map(str::to_string)
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    pub fn append_lines<T: Serialize>(&self, items: &[T]) -> Result<(), ServiceError> {
        let path = self.feedback_path();
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, item).map_err(|e| ServiceError::storage(&path, e))?;
            buf.push(b'\n');
        }
        let append = || -> std::io::Result<()> {
            let mut f = fs::OpenOptions::new().create(true).append(true).open(&path)?;
            f.write_all(&buf)?;
            f.sync_data()
        };
        append().map_err(|e| ServiceError::storage(&path, e))
    }

    /// Every line of the feedback log. A torn final line from a crash is
    /// skipped; a malformed line elsewhere is an error.
    pub fn read_lines<T: DeserializeOwned>(&self) -> Result<Vec<T>, ServiceError> {
        let path = self.feedback_path();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(ServiceError::storage(&path, e)),
        };
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut out = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(v) => out.push(v),
                Err(_) if i + 1 == lines.len() && !complete => {
                    tracing::warn!(line = i + 1, "ignoring torn last line of feedback log");
                }
                Err(e) => return Err(ServiceError::storage(&path, format!("line {}: {e}", i + 1))),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.write(SESSIONS_DIR, "a-1", &vec![1, 2]).unwrap();
        assert_eq!(store.read::<Vec<i32>>(SESSIONS_DIR, "a-1").unwrap(), Some(vec![1, 2]));
        assert_eq!(store.read::<Vec<i32>>(SESSIONS_DIR, "nope").unwrap(), None);
        assert_eq!(store.read::<Vec<i32>>(SESSIONS_DIR, "../x").unwrap(), None);
        assert_eq!(store.list(SESSIONS_DIR).unwrap(), vec!["a-1".to_string()]);
    }

    #[test]
    fn log_appends_and_skips_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.append_lines(&[1, 2]).unwrap();
        store.append_lines(&[3]).unwrap();
        assert_eq!(store.read_lines::<i32>().unwrap(), vec![1, 2, 3]);
        let mut f = fs::OpenOptions::new().append(true).open(store.feedback_path()).unwrap();
        f.write_all(b"{\"trunc").unwrap();
        assert_eq!(store.read_lines::<i32>().unwrap(), vec![1, 2, 3]);
    }
}
