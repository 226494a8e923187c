//! Flat `key = value` text format shared by configuration and sweep files.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys are case-sensitive. Repeating a key is an error.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

/// Parsed key-value document. Consumers `take` the keys they understand and
/// call [`KeyValues::finish`] to reject leftovers.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| {
                Error::config(line, format!("expected `key = value`, got `{body}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(Error::config(line, format!("malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(Error::config(line, format!("empty value for `{key}`")));
            }
            let prev = entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
            if let Some(prev) = prev {
                return Err(Error::config(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
        }
        Ok(Self { entries })
    }

    pub fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    /// Removes and returns all entries whose key starts with `prefix`, with
    /// the prefix stripped.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, Entry)> {
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let e = self.entries.remove(&k).expect("key listed above");
                (k[prefix.len()..].to_string(), e)
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, e)) => Err(Error::config(e.line, format!("unknown key `{key}`"))),
        }
    }
}

impl Entry {
    pub fn parse_f64(&self, key: &str) -> Result<f64> {
        parse_real(&self.value).ok_or_else(|| {
            Error::config(
                self.line,
                format!("`{key}`: `{}` is not a number", self.value),
            )
        })
    }

    pub fn parse_usize(&self, key: &str) -> Result<usize> {
        self.value.parse().map_err(|_| {
            Error::config(
                self.line,
                format!("`{key}`: `{}` is not a non-negative integer", self.value),
            )
        })
    }

    pub fn parse_u64(&self, key: &str) -> Result<u64> {
        self.value.parse().map_err(|_| {
            Error::config(
                self.line,
                format!("`{key}`: `{}` is not an unsigned integer", self.value),
            )
        })
    }

    pub fn parse_list_f64(&self, key: &str) -> Result<Vec<f64>> {
        self.value
            .split(',')
            .map(|s| {
                parse_real(s.trim()).ok_or_else(|| {
                    Error::config(
                        self.line,
                        format!("`{key}`: `{}` is not a number", s.trim()),
                    )
                })
            })
            .collect()
    }
}

// Accepts decimal numbers plus `-inf`/`off` (zero linear power in dB fields).
fn parse_real(s: &str) -> Option<f64> {
    match s {
        "-inf" | "off" => Some(f64::NEG_INFINITY),
        "inf" | "+inf" => Some(f64::INFINITY),
        _ => {
            let v: f64 = s.parse().ok()?;
            if v.is_nan() {
                None
            } else {
                Some(v)
            }
        }
    }
}
