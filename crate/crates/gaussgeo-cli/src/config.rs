//! Flat key-value configuration.
//!
//! ```text
//! # shared by every subcommand
//! seed = 7
//!
//! [sweep]
//! model = boundary-xy
//! set.delta = 1.25
//! grid.h = 0:2:0.05
//! quantities = gap, gmax
//! ```
//!
//! Keys before the first section apply to all subcommands; a section only
//! applies to the subcommand of the same name. `set.<param>` fixes a model
//! parameter and `grid.<param>` declares a sweep axis, in file order.

use std::path::Path;

use crate::error::{CliError, Result};

/// Ordered settings. Setting an existing key replaces its value in place,
/// so axis order follows first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) {
        let value = value.trim().to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `(suffix, value)` for every key `prefix.suffix`.
    pub fn prefixed<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries.iter().filter_map(move |(k, v)| {
            k.strip_prefix(prefix).and_then(|rest| rest.strip_prefix('.')).map(|s| (s, v.as_str()))
        })
    }

    /// Settings for `section` from config text.
    pub fn parse(text: &str, section: &str) -> Result<Self> {
        let mut out = Self::default();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::bad(format!("line {}: unterminated section header", lineno + 1)))?;
                current = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::bad(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::bad(format!("line {}: empty key", lineno + 1)));
            }
            if current.as_deref().is_none_or(|s| s == section) {
                out.set(key, value);
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path, section: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::IoFailure { path: path.to_path_buf(), source })?;
        Self::parse(&text, section)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let text = "seed = 3\n# note\n[sweep]\nmodel = xy\ngrid.h = 0:1:0.5\n[scaling]\nmodel = dicke\n[sweep]\nset.n = 10\nseed=4\n";
        let s = Settings::parse(text, "sweep").unwrap();
        assert_eq!(s.get("model"), Some("xy"));
        assert_eq!(s.get("seed"), Some("4"));
        assert_eq!(s.prefixed("set").collect::<Vec<_>>(), vec![("n", "10")]);
        let t = Settings::parse(text, "scaling").unwrap();
        assert_eq!(t.get("model"), Some("dicke"));
        assert_eq!(t.get("seed"), Some("3"));
    }

    #[test]
    fn replacing_keeps_position() {
        let mut s = Settings::default();
        s.set("grid.a", "0:1:1");
        s.set("grid.b", "0:1:1");
        s.set("grid.a", "0:2:1");
        assert_eq!(s.prefixed("grid").map(|p| p.0).collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(s.get("grid.a"), Some("0:2:1"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(Settings::parse("[sweep\n", "sweep"), Err(CliError::BadSpec(_))));
        assert!(matches!(Settings::parse("model xy\n", "sweep"), Err(CliError::BadSpec(_))));
        assert!(matches!(Settings::parse(" = 3\n", "sweep"), Err(CliError::BadSpec(_))));
    }
}
