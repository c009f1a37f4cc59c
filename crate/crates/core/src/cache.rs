//! On-disk cache of solve results, one JSON file per key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn hash_of<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex_digest(&bytes))
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Cache directory; `None` disables caching.
#[derive(Debug, Clone, Default)]
pub struct SolveCache {
    dir: Option<PathBuf>,
}

impl SolveCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self {
            dir: Some(dir.as_ref().to_path_buf()),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{kind}-{key}.json")))
    }

    /// Returns the stored value for `key_material`, computing and storing it on a miss.
    pub fn get_or_compute<K, T>(
        &self,
        kind: &str,
        key_material: &K,
        f: impl FnOnce() -> Result<T>,
    ) -> Result<T>
    where
        K: Serialize + ?Sized,
        T: Serialize + DeserializeOwned,
    {
        let Some(path) = self.path(kind, &hash_of(key_material)?) else {
            return f();
        };
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(v) = serde_json::from_str(&text) {
                return Ok(v);
            }
        }
        let v = f()?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(&v)?)?;
        fs::rename(&tmp, &path)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn second_lookup_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SolveCache::at(dir.path()).unwrap();
        let calls = Cell::new(0);
        let f = || {
            calls.set(calls.get() + 1);
            Ok(vec![1.5f64, 2.5])
        };
        let a: Vec<f64> = cache.get_or_compute("t", &("k", 1), f).unwrap();
        let b: Vec<f64> = cache.get_or_compute("t", &("k", 1), f).unwrap();
        assert_eq!(a, b);
        assert_eq!(calls.get(), 1);
        let _: Vec<f64> = cache.get_or_compute("t", &("k", 2), f).unwrap();
        assert_eq!(calls.get(), 2);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SolveCache::at(dir.path()).unwrap();
        let v = vec![9.121949646756631, 1.0 / 3.0, std::f64::consts::PI * 1e-300];
        let _: Vec<f64> = cache.get_or_compute("t", &0, || Ok(v.clone())).unwrap();
        let back: Vec<f64> = cache.get_or_compute("t", &0, || unreachable!()).unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            hex_digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
