//! `key = value` run manifests, one entry per line, sorted by key.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k} = {}\n", v.replace(['\n', '\r'], " ")))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| BenchError::io(path, e))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| BenchError::Parse {
                path: path.into(),
                line: i + 1,
                message: "expected 'key = value'".into(),
            })?;
            m.insert(k.trim().to_string(), v.to_string());
        }
        Ok(Self(m))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}
