//! Optional `key=value` config files. Every key corresponds to a flag, and an
//! explicit flag always wins over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

const KNOWN_KEYS: &[&str] = &[
    "seed", "resolution", "domain", "threads", "out", "lambda", "beta", "t", "h", "tpoints",
    "method", "tgrid", "seeds", "input", "output", "sample",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default())
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not key=value: {raw:?}", lineno + 1)
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("unknown config key {key:?} on line {}", lineno + 1);
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                bail!("duplicate config key {key:?} on line {}", lineno + 1);
            }
        }
        Ok(FileConfig { entries })
    }

    /// Typed lookup; `None` when the file does not set the key.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key));
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key} = {raw:?}: {e}"),
            },
        }
    }
}
