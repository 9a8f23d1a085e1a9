use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Output directory bound to one resolved config.
#[derive(Clone, Debug)]
pub struct Output {
    dir: PathBuf,
    header: String,
    stamp: Map<String, Value>,
}

impl Output {
    pub fn create(dir: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut stamp = Map::new();
        stamp.insert("command".into(), json!(cfg.command));
        stamp.insert("config_hash".into(), json!(cfg.hash()));
        stamp.insert("config".into(), json!(cfg.values()));
        Ok(Self {
            dir: dir.to_path_buf(),
            header: cfg.csv_header(),
            stamp,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes the config header, the column row and `rows`.
    pub fn csv(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut text = self.header.clone();
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Writes `body`'s fields next to the command, config and hash.
    pub fn json(&self, name: &str, body: Value) -> Result<PathBuf> {
        let mut map = self.stamp.clone();
        if let Value::Object(fields) = body {
            map.extend(fields);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).map_err(std::io::Error::from)?;
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Shortest round-trip representation, in exponent form for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}
