//! File-backed response cache: one file per key under the cache directory.

use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Concurrency-safe by construction: writes go to a temp file first and the
/// rename is atomic, so readers only ever see complete entries.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(key)
    }

    pub fn get(&self, key: &str) -> Result<Option<String>> {
        match fs::read_to_string(self.path(key)) {
            Ok(body) => Ok(Some(body)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::storage(e)),
        }
    }

    pub fn put(&self, key: &str, value: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(Error::storage)?;
        let tmp = self.dir.join(format!(".tmp-{key}"));
        fs::write(&tmp, value).map_err(Error::storage)?;
        fs::rename(&tmp, self.path(key)).map_err(Error::storage)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path().join("cache"));
        assert_eq!(cache.get("k").unwrap(), None);
        cache.put("k", "value").unwrap();
        assert_eq!(cache.get("k").unwrap(), Some("value".into()));
    }
}
