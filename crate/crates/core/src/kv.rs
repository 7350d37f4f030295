//! Flat `key = value` text files used for run configs and synthetic specs.
//!
//! One pair per line; blank lines and lines starting with `#` are ignored.
//! Keys are trimmed; values are trimmed and kept verbatim. A repeated key
//! overrides the earlier value.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvFile {
    entries: BTreeMap<String, String>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Format(format!("line {}: expected `key = value`", i + 1)));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Format(format!("line {}: empty key", i + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(KvFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Parses `key` when present.
    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Format(format!("key `{key}`: cannot parse `{v}`: {e}"))),
        }
    }

    pub fn parsed_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Renders entries in key order, one per line.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let kv = KvFile::parse("# c\nwindow = 10\n\ndim=50\nwindow = 5 \n").unwrap();
        assert_eq!(kv.get("window"), Some("5"));
        assert_eq!(kv.parsed::<usize>("dim").unwrap(), Some(50));
        assert_eq!(kv.parsed_or("seed", 7u64).unwrap(), 7);
        assert!(kv.parsed::<usize>("nope").unwrap().is_none());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KvFile::parse("just words").is_err());
        assert!(KvFile::parse(" = 3").is_err());
        assert!(KvFile::parse("dim = x").unwrap().parsed::<usize>("dim").is_err());
    }

    #[test]
    fn render_round_trips() {
        let kv = KvFile::parse("b = 2\na = x y\n").unwrap();
        assert_eq!(KvFile::parse(&kv.render()).unwrap(), kv);
    }
}
