//! Config-file loading and CLI/config/default precedence.
//!
//! A config file is either a JSON object or flat `key=value` lines
//! (`#` comments allowed). Keys match the long flag names. Values given on
//! the command line override the file; the file overrides built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, Value>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let trimmed = text.trim_start();
        let mut values = BTreeMap::new();
        if trimmed.starts_with('{') {
            let obj: serde_json::Map<String, Value> =
                serde_json::from_str(&text).context("parsing JSON config")?;
            values.extend(obj);
        } else {
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("config line {} is not key=value: {line}", lineno + 1))?;
                values.insert(key.trim().to_string(), Value::String(value.trim().to_string()));
            }
        }
        Ok(FileConfig { values })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(Value::String(s)) => {
                Ok(Some(s.parse().with_context(|| format!("config key {key}: bad number {s}"))?))
            }
            Some(v) => bail!("config key {key}: expected a number, got {v}"),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => {
                n.as_u64().map(Some).ok_or_else(|| anyhow!("config key {key}: not a u64"))
            }
            Some(Value::String(s)) => {
                Ok(Some(s.parse().with_context(|| format!("config key {key}: bad integer {s}"))?))
            }
            Some(v) => bail!("config key {key}: expected an integer, got {v}"),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Ok(Some(v.to_string())),
        }
    }

    /// List-valued key: JSON array or a comma/range string.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for item in items {
                    out.push(
                        item.as_f64().ok_or_else(|| anyhow!("config key {key}: bad number"))?,
                    );
                }
                Ok(Some(out))
            }
            Some(Value::String(s)) => Ok(Some(parse_f64_list(s)?)),
            Some(Value::Number(n)) => Ok(Some(vec![n
                .as_f64()
                .ok_or_else(|| anyhow!("config key {key}: bad number"))?])),
            Some(v) => bail!("config key {key}: expected a list, got {v}"),
        }
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.f64_list(key)? {
            None => Ok(None),
            Some(v) => Ok(Some(v.into_iter().map(|x| x as usize).collect())),
        }
    }
}

/// Parses "a,b,c" or "start:stop:count" (inclusive) or a single number.
pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("range spec must be start:stop:count, got {spec}");
        }
        let start: f64 = parts[0].trim().parse().context("range start")?;
        let stop: f64 = parts[1].trim().parse().context("range stop")?;
        let count: usize = parts[2].trim().parse().context("range count")?;
        if count == 0 {
            bail!("range count must be positive");
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s}")))
        .collect()
}

pub fn parse_usize_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad integer {s}")))
        .collect()
}
