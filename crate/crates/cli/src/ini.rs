//! Minimal INI reader: `[section]` headers, `key = value` lines, `#` or `;`
//! comments. Keys are case-sensitive and must belong to a section.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Ini {
    pub fn parse(text: &str, origin: &str) -> Result<Self, String> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| format!("{origin}:{}: malformed section header `{line}`", i + 1))?;
                ini.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1))?;
            let section = current.as_ref().ok_or_else(|| format!("{origin}:{}: key outside of any section", i + 1))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("{origin}:{}: empty key", i + 1));
            }
            let value = strip_comment(value).trim().to_string();
            if ini.sections.get_mut(section).unwrap().insert(key.to_string(), value).is_some() {
                return Err(format!("{origin}:{}: duplicate key `{section}.{key}`", i + 1));
            }
        }
        Ok(ini)
    }

    /// Applies `section.key=value`.
    pub fn set(&mut self, assignment: &str) -> Result<(), String> {
        let (path, value) =
            assignment.split_once('=').ok_or_else(|| format!("override `{assignment}` must look like section.key=value"))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .filter(|(s, k)| !s.is_empty() && !k.is_empty())
            .ok_or_else(|| format!("override `{assignment}` must name section.key"))?;
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn insert(&mut self, section: &str, key: &str, value: String) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value);
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sections.iter().flat_map(|(s, m)| m.keys().map(move |k| (s.as_str(), k.as_str())))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, entries) in &self.sections {
            if entries.is_empty() {
                continue;
            }
            if !s.is_empty() {
                s.push('\n');
            }
            let _ = writeln!(s, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

// Inline comments need whitespace before the marker so values may contain `#`.
fn strip_comment(v: &str) -> &str {
    let b = v.as_bytes();
    for i in 1..b.len() {
        if (b[i] == b'#' || b[i] == b';') && b[i - 1].is_ascii_whitespace() {
            return &v[..i];
        }
    }
    v
}
