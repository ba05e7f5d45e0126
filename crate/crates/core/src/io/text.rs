//! Helpers shared by the plain-text formats.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};

/// `key=value` lines. Blank lines and lines starting with `#` are skipped.
#[derive(Debug, Clone)]
pub struct KeyValues {
    file: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((k, v)) = trimmed.split_once('=') else {
                return Err(Error::parse(file, line_no, format!("expected key=value, got `{trimmed}`")));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(file, line_no, "empty key"));
            }
            if entries.insert(k.to_string(), (line_no, v.trim().to_string())).is_some() {
                return Err(Error::parse(file, line_no, format!("duplicate key `{k}`")));
            }
        }
        Ok(KeyValues {
            file: file.to_string(),
            entries,
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Rejects keys outside `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            Some((k, (line, _))) => Err(Error::parse(&self.file, *line, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn str(&self, key: &str) -> Result<(usize, &str)> {
        self.entries
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::MissingKey {
                file: self.file.clone(),
                key: key.to_string(),
            })
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.str(key)?;
        v.parse()
            .map_err(|_| Error::parse(&self.file, line, format!("bad value `{v}` for `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let (line, _) = self.str(key)?;
        let v: f64 = self.parsed(key)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::parse(&self.file, line, format!("`{key}` must be finite")))
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.contains(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn parsed_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        if self.contains(key) {
            self.parsed(key)
        } else {
            Ok(default)
        }
    }

    /// Whitespace-separated finite floats.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.str(key)?;
        parse_floats(v).ok_or_else(|| Error::parse(&self.file, line, format!("bad number list for `{key}`")))
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.entries.get(key).map_or(0, |(l, _)| *l);
        Error::parse(&self.file, line, message)
    }
}

pub fn parse_floats(s: &str) -> Option<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

/// Accumulates `key=value` lines in insertion order.
#[derive(Debug, Default)]
pub struct KeyValueWriter {
    out: String,
}

impl KeyValueWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.out, "{key}={value}");
        self
    }

    pub fn put_list(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.put(key, joined.join(" "))
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Checks a CSV header line.
pub fn expect_header(file: &str, line: Option<&str>, header: &str) -> Result<()> {
    match line {
        Some(l) if l.trim_end() == header => Ok(()),
        Some(l) => Err(Error::parse(file, 1, format!("expected header `{header}`, got `{l}`"))),
        None => Err(Error::parse(file, 1, "file is empty")),
    }
}

/// Column `idx` of a split CSV row, parsed.
pub fn field<T: std::str::FromStr>(file: &str, line: usize, cols: &[&str], idx: usize, name: &str) -> Result<T> {
    let raw = cols
        .get(idx)
        .ok_or_else(|| Error::parse(file, line, format!("missing column `{name}`")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(file, line, format!("bad {name} `{raw}`")))
}

pub fn finite_field(file: &str, line: usize, cols: &[&str], idx: usize, name: &str) -> Result<f64> {
    let v: f64 = field(file, line, cols, idx, name)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(file, line, format!("{name} must be finite")))
    }
}
