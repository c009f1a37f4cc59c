//! Run configuration: a key=value file overridden by flags, hashed for provenance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use fichera::cache::hash_of;
use serde::Serialize;

/// Bad user input; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Usage<T> = std::result::Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Usage<T> {
    Err(UsageError(msg.into()))
}

/// Keys shared by every command.
pub const COMMON_KEYS: [&str; 5] = ["out", "cache", "workers", "seed", "tol"];

/// Merged configuration of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    /// Reads `file` (if any), applies `flags` on top and rejects keys outside `allowed`.
    pub fn build(
        command: &str,
        file: Option<&Path>,
        flags: Vec<(&str, Option<String>)>,
        allowed: &[&str],
    ) -> Usage<Self> {
        let mut params = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            params = parse_key_values(&text)?;
        }
        for (k, v) in flags {
            if let Some(v) = v {
                params.insert(k.to_string(), v);
            }
        }
        for k in params.keys() {
            if !allowed.contains(&k.as_str()) && !COMMON_KEYS.contains(&k.as_str()) {
                return usage(format!("unknown key '{k}' for {command}"));
            }
        }
        Ok(Self {
            command: command.into(),
            params,
        })
    }

    pub fn hash(&self) -> String {
        hash_of(self).expect("config serializes")
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Usage<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("invalid value '{s}' for {key}"))),
        }
    }

    pub fn opt<T: std::str::FromStr>(&self, key: &str) -> Usage<Option<T>> {
        self.raw(key)
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| UsageError(format!("invalid value '{s}' for {key}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Usage<bool> {
        self.get(key, false)
    }

    /// Values of `key` as a step-1 ladder `a:b`, a stepped ladder `a:b:h` or a list.
    pub fn ladder(&self, key: &str, default: &str) -> Usage<Vec<f64>> {
        parse_ladder(self.raw(key).unwrap_or(default))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Usage<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", i + 1));
        };
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

/// `a:b` is `a, a+1, ...` up to `b` with `b` always included; `a:b:h` uses step `h`;
/// otherwise a comma-separated list.
pub fn parse_ladder(spec: &str) -> Usage<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| UsageError(format!("invalid number '{s}' in '{spec}'")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.len() {
        1 => spec.split(',').map(num).collect::<Usage<Vec<_>>>()?,
        2 | 3 => {
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let h = if parts.len() == 3 {
                num(parts[2])?
            } else {
                1.0
            };
            if !(h > 0.0) || !(b >= a) {
                return usage(format!("empty range '{spec}'"));
            }
            let mut v = Vec::new();
            let mut i = 0;
            loop {
                let x = a + i as f64 * h;
                if x > b - 1e-9 {
                    break;
                }
                v.push(x);
                i += 1;
            }
            v.push(b);
            v
        }
        _ => return usage(format!("invalid range '{spec}'")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return usage(format!("invalid range '{spec}'"));
    }
    Ok(values)
}
