//! Flat `key=value` run configuration: defaults, then config file, then flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::exit::Failure;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Failure::usage(format!(
                    "{origin}:{}: expected key=value, got {line:?}",
                    i + 1
                ))
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::no_input(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.clone());
        }
    }

    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.values
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        let raw = self
            .get_str(key)
            .ok_or_else(|| Failure::usage(format!("missing value for {key}")))?;
        raw.parse()
            .map_err(|e| Failure::usage(format!("invalid {key} = {raw:?}: {e}")))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        match self.get_str(key) {
            None | Some("") => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Vec<f64>, Failure> {
        let raw = self
            .get_str(key)
            .ok_or_else(|| Failure::usage(format!("missing value for {key}")))?;
        raw.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Failure::usage(format!("invalid {key} entry {x:?}: {e}")))
            })
            .collect()
    }

    /// `lo:hi` pair.
    pub fn get_range(&self, key: &str) -> Result<[f64; 2], Failure> {
        let raw = self
            .get_str(key)
            .ok_or_else(|| Failure::usage(format!("missing value for {key}")))?;
        let (a, b) = raw
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("{key} must look like lo:hi, got {raw:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Failure::usage(format!("invalid {key} bound {x:?}: {e}")))
        };
        Ok([parse(a)?, parse(b)?])
    }

    /// Rejects keys that the subcommand does not know.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), Failure> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Failure::usage(format!("unknown setting {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    #[cfg(test)]
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}
