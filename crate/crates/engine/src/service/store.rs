//! Named weight files shared by all sessions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use nca_core::RuleWeights;
use serde::Serialize;

use crate::io::{decode_weights, load_weights, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("invalid weights id {0:?} (use 1-64 characters from [A-Za-z0-9_-])")]
    BadId(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightInfo {
    pub id: String,
    pub channels: usize,
    pub hidden: usize,
    pub variant: &'static str,
}

/// In-memory registry, optionally mirrored to a directory of `<id>.ncaw`
/// files.
#[derive(Debug, Clone, Default)]
pub struct WeightStore {
    inner: Arc<RwLock<BTreeMap<String, Arc<RuleWeights>>>>,
    dir: Option<PathBuf>,
}

fn check_id(id: &str) -> Result<(), StoreError> {
    let ok =
        !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_string()))
    }
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every readable `*.ncaw` file in `dir`; unreadable files are
    /// skipped with a warning.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut map = BTreeMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("ncaw") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            if check_id(&id).is_err() {
                continue;
            }
            match load_weights(&path) {
                Ok(w) => {
                    map.insert(id, Arc::new(w));
                }
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(Self {
            inner: Arc::new(RwLock::new(map)),
            dir: Some(dir),
        })
    }

    pub fn insert(&self, id: &str, weights: RuleWeights) -> Result<(), StoreError> {
        check_id(id)?;
        weights.validate().map_err(FormatError::from)?;
        if let Some(dir) = &self.dir {
            crate::io::save_weights(&weights, dir.join(format!("{id}.ncaw")))?;
        }
        self.inner
            .write()
            .expect("store lock")
            .insert(id.to_string(), Arc::new(weights));
        Ok(())
    }

    /// Decodes and stores an uploaded NCAW file.
    pub fn upload(&self, id: &str, bytes: &[u8]) -> Result<WeightInfo, StoreError> {
        check_id(id)?;
        let w = decode_weights(bytes)?;
        let info = info(id, &w);
        self.insert(id, w)?;
        Ok(info)
    }

    pub fn get(&self, id: &str) -> Option<Arc<RuleWeights>> {
        self.inner.read().expect("store lock").get(id).cloned()
    }

    pub fn list(&self) -> Vec<WeightInfo> {
        self.inner
            .read()
            .expect("store lock")
            .iter()
            .map(|(id, w)| info(id, w))
            .collect()
    }
}

fn info(id: &str, w: &RuleWeights) -> WeightInfo {
    WeightInfo {
        id: id.to_string(),
        channels: w.channels,
        hidden: w.hidden,
        variant: w.variant.name(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nca_core::Variant;

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = WeightStore::open(dir.path()).unwrap();
        let w = RuleWeights::random(4, 6, Variant::Pe, 3, 1.0);
        let bytes = crate::io::encode_weights(&w).unwrap();
        store.upload("pe-1", &bytes).unwrap();
        assert!(store.upload("../evil", &bytes).is_err());
        assert!(store.upload("bad", b"junk").is_err());
        let reopened = WeightStore::open(dir.path()).unwrap();
        assert_eq!(*reopened.get("pe-1").unwrap(), w);
        assert_eq!(reopened.list().len(), 1);
        assert_eq!(reopened.list()[0].variant, "pe");
    }
}
