//! Flat key-value experiment configuration with fail-fast typed access.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, blank
//! lines are skipped. Keys are unique; a repeated key is an error rather
//! than a silent override. Suites validate their key set up front, so a
//! misspelled key fails before any sampling starts.

use crate::error::{MmError, Result};
use std::collections::BTreeMap;
use std::path::Path;

fn config_err(msg: impl Into<String>) -> MmError {
    MmError::Config(msg.into())
}

/// Parsed configuration: a sorted map from key to raw value string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(config_err(format!("line {}: empty key", lineno + 1)));
            }
            if value.is_empty() {
                return Err(config_err(format!("line {}: empty value for '{key}'", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    /// Reads and parses a file; unreadable files count as config errors so
    /// the CLI reports them with the usage exit code.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Inserts or overwrites a key; used for command-line overrides.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// All entries in sorted order, for deterministic report echoes.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Rejects any key outside `known`, naming the offenders.
    pub fn require_known(&self, context: &str, known: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !known.contains(k))
            .collect();
        if unknown.is_empty() {
            return Ok(());
        }
        let mut sorted_known: Vec<&str> = known.to_vec();
        sorted_known.sort_unstable();
        Err(config_err(format!(
            "{context}: unknown key(s) {}; known keys: {}",
            unknown.join(", "),
            sorted_known.join(", ")
        )))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_scalar(key, "an unsigned integer", |s| s.parse::<u64>().ok())
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_scalar(key, "an unsigned integer", |s| s.parse::<usize>().ok())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_scalar(key, "a finite number", |s| {
            s.parse::<f64>().ok().filter(|v| v.is_finite())
        })
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.parse_list(key, "unsigned integers", |s| s.parse::<usize>().ok())
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parse_list(key, "finite numbers", |s| {
            s.parse::<f64>().ok().filter(|v| v.is_finite())
        })
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_usize(key)?.unwrap_or(default))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        Ok(self.get_usize_list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(self.get_f64_list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.get_str(key).unwrap_or(default).to_string()
    }

    fn parse_scalar<T>(
        &self,
        key: &str,
        wanted: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => parse(raw).map(Some).ok_or_else(|| {
                config_err(format!("key '{key}': expected {wanted}, got '{raw}'"))
            }),
        }
    }

    /// Lists are comma-separated; surrounding whitespace per item is fine.
    fn parse_list<T>(
        &self,
        key: &str,
        wanted: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    parse(item).ok_or_else(|| {
                        config_err(format!(
                            "key '{key}': expected comma-separated {wanted}, got '{item}'"
                        ))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_blanks() {
        let cfg = Config::parse("# header\n\nm = 500\ndims = 10, 20,30 # inline\nkind = surface\n")
            .unwrap();
        assert_eq!(cfg.get_usize("m").unwrap(), Some(500));
        assert_eq!(cfg.get_usize_list("dims").unwrap(), Some(vec![10, 20, 30]));
        assert_eq!(cfg.get_str("kind"), Some("surface"));
        assert_eq!(cfg.get_str("absent"), None);
    }

    #[test]
    fn echo_is_sorted_by_key() {
        let cfg = Config::parse("zeta = 1\nalpha = 2\nmid = 3\n").unwrap();
        let keys: Vec<String> = cfg.echo().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, vec!["alpha", "mid", "zeta"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("just words\n").is_err());
        assert!(Config::parse("= 3\n").is_err());
        assert!(Config::parse("m =\n").is_err());
        assert!(Config::parse("m = 1\nm = 2\n").is_err());
    }

    #[test]
    fn typed_getters_validate_values() {
        let cfg = Config::parse("m = -3\nx = nan\nlist = 1,two\n").unwrap();
        assert!(cfg.get_usize("m").is_err());
        assert!(cfg.get_f64("x").is_err());
        assert!(cfg.get_usize_list("list").is_err());
        // The raw strings are still reachable.
        assert_eq!(cfg.get_str("m"), Some("-3"));
    }

    #[test]
    fn unknown_keys_are_named_in_the_error() {
        let cfg = Config::parse("m = 5\nbogus = 1\n").unwrap();
        let err = cfg.require_known("suite x", &["m", "seed"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.contains("suite x"), "{msg}");
        assert!(cfg.require_known("suite x", &["m", "bogus"]).is_ok());
    }

    #[test]
    fn defaults_apply_only_when_absent() {
        let cfg = Config::parse("m = 7\n").unwrap();
        assert_eq!(cfg.usize_or("m", 3).unwrap(), 7);
        assert_eq!(cfg.usize_or("n", 3).unwrap(), 3);
        assert_eq!(cfg.f64_list_or("axes", &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(cfg.str_or("kind", "surface"), "surface");
    }

    #[test]
    fn set_overrides_parsed_values() {
        let mut cfg = Config::parse("seed = 1\n").unwrap();
        cfg.set("seed", "9");
        assert_eq!(cfg.get_u64("seed").unwrap(), Some(9));
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = Config::from_path(Path::new("/nonexistent/x.cfg")).unwrap_err();
        assert!(matches!(err, MmError::Config(_)));
        assert!(err.to_string().contains("/nonexistent/x.cfg"));
    }
}
