//! Merges flags over an optional TOML file and records every effective
//! setting for the output header.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Comma-separated list of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let items = s
            .trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad size `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() || items.contains(&0) {
            return Err(Error::Config(format!("sizes must be positive: `{s}`")));
        }
        Ok(SizeList(items))
    }
}

impl Display for SizeList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(RealList)
    }
}

impl Display for RealList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| crate::interval::fmt_f64(*x)).collect();
        f.write_str(&parts.join(","))
    }
}

pub struct Resolver {
    file: toml::Table,
    echo: Vec<(String, String)>,
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(items) => items
            .iter()
            .map(|item| match item {
                toml::Value::Array(_) => format!("[{}]", value_text(item)),
                _ => value_text(item),
            })
            .collect::<Vec<_>>()
            .join(","),
        other => other.to_string(),
    }
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Resolver> {
        let file = match config {
            None => toml::Table::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        Ok(Resolver {
            file,
            echo: Vec::new(),
        })
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.file.remove(key) {
            None => Ok(None),
            Some(v) => {
                let text = value_text(&v);
                text.parse::<T>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("bad value for `{key}` in config: {text}")))
            }
        }
    }

    /// Flag value, else file value, else `default`.
    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let file = self.file_value(key)?;
        let v = flag.or(file).unwrap_or(default);
        self.echo.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    /// Like [`get`](Self::get) without a default; absent values echo as empty.
    pub fn get_opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let file = self.file_value(key)?;
        let v = flag.or(file);
        self.echo.push((key.to_string(), v.as_ref().map_or(String::new(), T::to_string)));
        Ok(v)
    }

    pub fn note(&mut self, key: &str, value: impl Display) {
        self.echo.push((key.to_string(), value.to_string()));
    }

    /// Fails on config keys that no setting consumed.
    pub fn finish(self) -> Result<Vec<(String, String)>> {
        if let Some(key) = self.file.keys().next() {
            return Err(Error::Config(format!("unknown config key `{key}`")));
        }
        Ok(self.echo)
    }
}
