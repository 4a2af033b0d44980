//! Flat `key=value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use msboot::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim()
        .trim_start_matches("--")
        .replace('_', "-")
        .to_ascii_lowercase()
}

impl ConfigFile {
    pub fn parse(text: &str, known: &[&str]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key=value", i + 1))
            })?;
            let key = normalize(key);
            if !known.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "config line {}: unknown key `{key}`",
                    i + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path, known: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, known)
    }

    /// `flag` if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn pick_list(&self, flag: Option<Vec<f64>>, key: &str) -> Result<Option<Vec<f64>>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.entries
            .get(key)
            .map(|v| {
                parse_list(v)
                    .map_err(|_| Error::Parse(format!("config key `{key}`: bad list `{v}`")))
            })
            .transpose()
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',').map(|x| x.trim().parse::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[&str] = &["model", "n", "xbar-norm2", "xbar"];

    #[test]
    fn flags_override_file() {
        let cfg = ConfigFile::parse(
            "# comment\nmodel = exponential\nn=10 # trailing\nxbar_norm2=2.68\n",
            KEYS,
        )
        .unwrap();
        assert_eq!(
            cfg.pick::<String>(None, "model").unwrap().as_deref(),
            Some("exponential")
        );
        assert_eq!(cfg.pick(Some(100.0), "n").unwrap(), Some(100.0));
        assert_eq!(cfg.pick::<f64>(None, "n").unwrap(), Some(10.0));
        assert_eq!(cfg.pick::<f64>(None, "xbar-norm2").unwrap(), Some(2.68));
    }

    #[test]
    fn rejects_unknown_and_malformed_lines() {
        assert!(ConfigFile::parse("colour=red", KEYS).is_err());
        assert!(ConfigFile::parse("model", KEYS).is_err());
        let cfg = ConfigFile::parse("n=ten", KEYS).unwrap();
        assert!(cfg.pick::<f64>(None, "n").is_err());
    }

    #[test]
    fn lists() {
        let cfg = ConfigFile::parse("xbar=1.5, -2", KEYS).unwrap();
        assert_eq!(cfg.pick_list(None, "xbar").unwrap(), Some(vec![1.5, -2.0]));
    }
}
