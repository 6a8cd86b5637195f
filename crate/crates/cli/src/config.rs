//! Flat `key = value` configs with `[section]` headers.
//!
//! Keys before the first header live in the root section `""`. Lines whose
//! first non-blank character is `#` are comments. Order of sections and of
//! keys within a section is preserved, so `serialize` followed by `parse`
//! reproduces the config exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::CliError;

/// A parsed experiment config: sections of string-valued keys.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ExperimentConfig {
    sections: IndexMap<String, IndexMap<String, String>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn valid_value(s: &str) -> bool {
    s.trim() == s && !s.contains(['\n', '\r'])
}

fn malformed(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config {
        line: Some(line),
        msg: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::new();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| malformed(n, "section header missing ']'"))?
                    .trim();
                if !valid_name(name) {
                    return Err(malformed(n, format!("bad section name {name:?}")));
                }
                if cfg.sections.contains_key(name) {
                    return Err(malformed(n, format!("section [{name}] appears twice")));
                }
                cfg.sections.insert(name.to_string(), IndexMap::new());
                current = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| malformed(n, format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(malformed(n, format!("bad key {key:?}")));
            }
            let section = cfg.sections.entry(current.clone()).or_default();
            if section.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(malformed(n, format!("key {key:?} repeated")));
            }
        }
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(root) = self.sections.get("") {
            for (k, v) in root {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        for (name, keys) in self.sections.iter().filter(|(n, _)| !n.is_empty()) {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in keys {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    /// Sets (or replaces) a value; the root section is `""`.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |msg: String| CliError::Config { line: None, msg };
        if !(section.is_empty() || valid_name(section)) {
            return Err(bad(format!("bad section name {section:?}")));
        }
        if !valid_name(key) {
            return Err(bad(format!("bad key {key:?}")));
        }
        let value = value.trim();
        if !valid_value(value) {
            return Err(bad(format!("bad value for {key}")));
        }
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn remove(&mut self, section: &str, key: &str) -> Option<String> {
        let keys = self.sections.get_mut(section)?;
        let v = keys.shift_remove(key);
        if keys.is_empty() && section.is_empty() {
            self.sections.shift_remove(section);
        }
        v
    }

    /// Applies `section.key=value` (or `key=value` for the root section).
    pub fn set_dotted(&mut self, assignment: &str) -> Result<(), CliError> {
        let (path, value) = assignment.split_once('=').ok_or_else(|| CliError::Config {
            line: None,
            msg: format!("override {assignment:?} is not section.key=value"),
        })?;
        match path.trim().rsplit_once('.') {
            Some((section, key)) => self.set(section, key, value),
            None => self.set("", path.trim(), value),
        }
    }

    /// `(section, key)` pairs in file order.
    pub fn keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .iter()
            .flat_map(|(s, keys)| keys.keys().map(move |k| (s.as_str(), k.as_str())))
    }

    pub fn seed(&self) -> Option<&str> {
        self.get("", "seed")
    }
}

/// Something a config value can be read as.
pub trait ConfigValue: Sized {
    fn from_config(text: &str) -> Result<Self, String>;
    fn to_config(&self) -> String;
}

macro_rules! via_fromstr {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn from_config(text: &str) -> Result<Self, String> {
                <$t>::from_str(text).map_err(|e| e.to_string())
            }
            fn to_config(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

via_fromstr!(usize, u64, u32, i32, bool, String);

impl ConfigValue for f64 {
    /// Accepts `inf` as well as ordinary numbers.
    fn from_config(text: &str) -> Result<Self, String> {
        fracheat::norms::parse_exponent(text)
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| format!("not a number: {text:?}"))
    }

    fn to_config(&self) -> String {
        if *self == f64::INFINITY {
            "inf".into()
        } else {
            format!("{self:?}")
        }
    }
}

impl ConfigValue for fracheat::Recipe {
    fn from_config(text: &str) -> Result<Self, String> {
        text.parse().map_err(|e: fracheat::Error| e.to_string())
    }

    fn to_config(&self) -> String {
        self.to_string()
    }
}

/// Comma-separated lists.
impl<T: ConfigValue> ConfigValue for Vec<T> {
    fn from_config(text: &str) -> Result<Self, String> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(T::from_config)
            .collect()
    }

    fn to_config(&self) -> String {
        self.iter().map(T::to_config).collect::<Vec<_>>().join(", ")
    }
}

/// Reads typed values out of a config while recording every value used,
/// defaults included, into the resolved config.
pub struct Resolver<'a> {
    input: &'a ExperimentConfig,
    resolved: ExperimentConfig,
}

impl<'a> Resolver<'a> {
    pub fn new(input: &'a ExperimentConfig) -> Self {
        Resolver {
            input,
            resolved: ExperimentConfig::new(),
        }
    }

    fn record(&mut self, section: &str, key: &str, value: String) -> Result<(), CliError> {
        self.resolved.set(section, key, &value)
    }

    fn read<T: ConfigValue>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        self.input
            .get(section, key)
            .map(|text| {
                T::from_config(text).map_err(|e| CliError::Config {
                    line: None,
                    msg: format!("{}{key}: {e}", prefix(section)),
                })
            })
            .transpose()
    }

    pub fn value<T: ConfigValue>(&mut self, section: &str, key: &str, default: T) -> Result<T, CliError> {
        let v = self.read(section, key)?.unwrap_or(default);
        self.record(section, key, v.to_config())?;
        Ok(v)
    }

    /// Optional keys are recorded only when present.
    pub fn optional<T: ConfigValue>(&mut self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        let v: Option<T> = self.read(section, key)?;
        if let Some(v) = &v {
            self.record(section, key, v.to_config())?;
        }
        Ok(v)
    }

    /// Records a derived value without reading it.
    pub fn note(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        self.record(section, key, value.to_string())
    }

    /// Rejects keys in the input that no command step consumed.
    pub fn finish(self) -> Result<ExperimentConfig, CliError> {
        let unused: Vec<String> = self
            .input
            .keys()
            .filter(|(s, k)| self.resolved.get(s, k).is_none())
            .map(|(s, k)| format!("{}{k}", prefix(s)))
            .collect();
        if !unused.is_empty() {
            return Err(CliError::Config {
                line: None,
                msg: format!("unknown keys for this command: {}", unused.join(", ")),
            });
        }
        Ok(self.resolved)
    }
}

fn prefix(section: &str) -> String {
    if section.is_empty() {
        String::new()
    } else {
        format!("{section}.")
    }
}
