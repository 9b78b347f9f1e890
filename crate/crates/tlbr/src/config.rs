//! Flat `key = value` configuration files and flag resolution.
//!
//! Keys are the long flag names (`k`, `max-restarts`, ...). A value given
//! on the command line wins over the file, which wins over the default.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let key = key.trim().to_string();
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key}",
                no + 1
            )));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>> {
    parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Writes a map in the format [`parse`] reads.
pub fn render(values: &BTreeMap<String, String>) -> String {
    values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Merges flags, file values and defaults, remembering what was used.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    /// Resolves an optional setting with a custom parser for file values.
    pub fn value_with<T: Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        let from_file = match self.file.remove(key) {
            Some(raw) => {
                Some(parse(&raw).map_err(|e| Error::Config(format!("{key} = {raw}: {e}")))?)
            }
            None => None,
        };
        let value = flag.or(from_file).or(default);
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn value<T: Display + std::str::FromStr>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.value_with(key, flag, default, |s| {
            s.parse::<T>().map_err(|e| e.to_string())
        })
    }

    pub fn required<T: Display + std::str::FromStr>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T>
    where
        T::Err: Display,
    {
        self.value(key, flag, default)?
            .ok_or_else(|| Error::Config(format!("missing required setting {key}")))
    }

    /// Boolean switch: set when the flag is given or the file says `true`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let on = self
            .value(key, flag.then_some(true), Some(false))?
            .unwrap_or(false);
        Ok(on)
    }

    /// The resolved settings; fails on file keys nobody asked for.
    pub fn finish(self) -> Result<BTreeMap<String, String>> {
        if let Some(key) = self.file.keys().next() {
            return Err(Error::Config(format!("unknown configuration key {key}")));
        }
        Ok(self.resolved)
    }
}
