//! Optional key=value configuration file.
//!
//! Precedence: command-line flags override config-file values, which override
//! built-in defaults. Lines are `key = value` (whitespace optional); `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    number + 1
                ));
            };
            values.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(FileConfig { values })
    }

    /// Flag wins, then config value, then default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, String> {
        if let Some(value) = flag {
            return Ok(value);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| format!("config key {key} has unparseable value {raw:?}")),
            None => Ok(default),
        }
    }
}
