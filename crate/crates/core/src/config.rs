//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; trailing `# ...`
//! comments are stripped. Keys may use `-` or `_` interchangeably and are
//! normalized to `-`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub type ConfigMap = BTreeMap<String, String>;

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", i + 1)))?;
        let key = normalize_key(key);
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse(format!("line {}: malformed key '{key}'", i + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<ConfigMap> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Parses `a=1,b=2` into ordered pairs.
pub fn parse_pairs(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("expected key=value, found '{item}'")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Looks up the required keys of a `key=value` list; any other key is an error.
pub fn pairs_exact<const N: usize>(spec: &str, keys: [&str; N]) -> Result<[f64; N]> {
    let pairs = parse_pairs(spec)?;
    if let Some((k, _)) = pairs.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
        return Err(Error::Argument(format!("unknown key '{k}' in '{spec}'")));
    }
    let mut out = [0.0; N];
    for (slot, key) in out.iter_mut().zip(keys) {
        let hits: Vec<_> = pairs.iter().filter(|(k, _)| k == key).collect();
        let [(_, v)] = hits.as_slice() else {
            return Err(Error::Argument(format!("'{spec}' must set '{key}' exactly once")));
        };
        *slot = v
            .parse()
            .map_err(|_| Error::Argument(format!("'{key}={v}' is not a number")))?;
    }
    Ok(out)
}

/// Parses `lo:step:hi` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Argument(format!("'{s}' is not a number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0 && hi >= lo) {
                return Err(Error::Argument(format!("bad range '{spec}'")));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            // Snap to 12 decimals so 0:0.1:0.3 yields 0.3, not 0.30000000000000004.
            Ok((0..=count)
                .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(Error::Argument(format!("bad grid '{spec}'"))),
    }
}
