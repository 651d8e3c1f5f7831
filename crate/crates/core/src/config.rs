//! `key=value` config files used for tariff and battery settings.
//!
//! Blank lines and lines starting with `#` are ignored. Keys not present keep
//! their defaults; unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("unknown key '{key}' (known: {known})")]
    UnknownKey { key: String, known: String },
    #[error("key '{key}': cannot parse '{value}' as a number")]
    BadNumber { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::DuplicateKey { line: i + 1, key });
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn ensure_known(&self, known: &[&str]) -> Result<(), ConfigError> {
        for key in self.entries.keys() {
            if !known.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey {
                    key: key.clone(),
                    known: known.join(", "),
                });
            }
        }
        Ok(())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| ConfigError::BadNumber {
                    key: key.to_string(),
                    value: v.clone(),
                })
            })
            .transpose()
    }

    pub fn override_f64(&self, key: &str, target: &mut f64) -> Result<(), ConfigError> {
        if let Some(v) = self.get::<f64>(key)? {
            *target = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# tariff\n rate_peak = 0.2\n\noffpeak_start_slot=3\n").unwrap();
        assert_eq!(kv.get::<f64>("rate_peak").unwrap(), Some(0.2));
        assert_eq!(kv.get::<u8>("offpeak_start_slot").unwrap(), Some(3));
        assert_eq!(kv.get::<f64>("absent").unwrap(), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            KeyValues::parse("a=1\nnot a pair\n"),
            Err(ConfigError::Syntax { line: 2 })
        ));
        assert!(matches!(
            KeyValues::parse("a=1\na=2\n"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        let kv = KeyValues::parse("a=x").unwrap();
        assert!(matches!(
            kv.get::<f64>("a"),
            Err(ConfigError::BadNumber { .. })
        ));
        assert!(kv.ensure_known(&["b"]).is_err());
    }
}
