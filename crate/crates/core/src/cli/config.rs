//! `key = value` experiment files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Resolved parameters of one command: defaults overridden by the file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("key '{k}' given twice")));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Applies `overrides` to `defaults`; keys absent from `defaults` are rejected.
    pub fn resolve(command: &str, defaults: &[(&str, &str)], overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in overrides {
            match values.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => {
                    return Err(Error::Config(format!(
                        "unknown key '{k}' for command {command}"
                    )))
                }
            }
        }
        Ok(Self {
            command: command.to_string(),
            values,
        })
    }

    pub fn load(command: &str, defaults: &[(&str, &str)], path: Option<&Path>, extra: &[String]) -> Result<Self> {
        let mut pairs = match path {
            Some(p) => parse_pairs(&std::fs::read_to_string(p).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", p.display()))
            })?)?,
            None => BTreeMap::new(),
        };
        for s in extra {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {s:?} is not key=value")))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::resolve(command, defaults, &pairs)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("key '{key}': cannot parse {raw:?}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.raw(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("key '{key}': cannot parse item {s:?}")))
            })
            .collect()
    }

    /// Canonical text `command=<name>` followed by sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        let mut s = format!("command={}\n", self.command);
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// `# key=value` lines for CSV headers, starting with the hash.
    pub fn csv_header(&self) -> String {
        let mut s = format!("# sgm {}\n# config_hash={}\n", self.command, self.hash());
        for (k, v) in &self.values {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }
}
