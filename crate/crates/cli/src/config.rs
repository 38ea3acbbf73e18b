//! Flat key-value configuration files with one section per mode, and the run
//! manifest (same format) that makes every run reproducible.
//!
//! ```text
//! # comment
//! g = 5e-2
//! [evolve]
//! theta = 5e-1
//! t-max = 1e2
//! ```
//!
//! Keys before any section header apply to every mode; keys inside a section
//! apply to that mode only and win over the global ones. Command-line flags
//! win over both. Feeding a manifest back through `--config` reproduces the
//! run bit-for-bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parsed configuration: global keys plus per-section keys.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .with_context(|| format!("line {}: unterminated section header", lineno + 1))?;
                current = Some(name.trim().to_string());
                cfg.sections.entry(name.trim().to_string()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            match &current {
                Some(section) => {
                    cfg.sections
                        .get_mut(section)
                        .expect("section entry created above")
                        .insert(key, value);
                }
                None => {
                    cfg.global.insert(key, value);
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Value for `key` as seen by `mode`: the section wins over globals.
    pub fn get(&self, mode: &str, key: &str) -> Option<&str> {
        self.sections
            .get(mode)
            .and_then(|s| s.get(key))
            .or_else(|| self.global.get(key))
            .map(String::as_str)
    }
}

/// Full-precision decimal for floats so a manifest round-trips bit-exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.17e}")
}

/// Serialize a resolved run as a manifest (a valid config for the same mode).
pub fn render_manifest(mode: &str, tool_version: &str, entries: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# run manifest: every parameter below is resolved;");
    let _ = writeln!(
        out,
        "# feed back with `parqed {mode} --config <this file>` to reproduce the run."
    );
    let _ = writeln!(out, "# quantities are in units of omega (time in 1/omega).");
    let _ = writeln!(out, "tool = parqed {tool_version}");
    let _ = writeln!(out, "[{mode}]");
    for (key, value) in entries {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}

/// Parse `<axis>=<start>:<stop>:<count>`.
pub fn parse_grid_spec(spec: &str) -> Result<(String, f64, f64, usize)> {
    let (axis, rest) = spec
        .split_once('=')
        .with_context(|| format!("grid spec '{spec}' is not <axis>=<start>:<stop>:<count>"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        bail!("grid spec '{spec}' needs <start>:<stop>:<count>");
    }
    let start: f64 = parts[0]
        .parse()
        .with_context(|| format!("bad grid start '{}'", parts[0]))?;
    let stop: f64 = parts[1]
        .parse()
        .with_context(|| format!("bad grid stop '{}'", parts[1]))?;
    let count: usize = parts[2]
        .parse()
        .with_context(|| format!("bad grid count '{}'", parts[2]))?;
    if count == 0 {
        bail!("grid '{spec}': count must be at least 1");
    }
    Ok((axis.trim().to_string(), start, stop, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_globals() {
        let cfg = ConfigFile::parse(
            "# comment\n\
             g = 0.05\n\
             [evolve]\n\
             theta = 0.8\n\
             [steady]\n\
             theta = 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.get("evolve", "g"), Some("0.05"));
        assert_eq!(cfg.get("evolve", "theta"), Some("0.8"));
        assert_eq!(cfg.get("steady", "theta"), Some("0.3"));
        assert_eq!(cfg.get("steady", "missing"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("[unterminated\n").is_err());
        assert!(ConfigFile::parse("no equals sign\n").is_err());
    }

    #[test]
    fn float_round_trip_is_exact() {
        for v in [0.05, 1.0 / 3.0, 2.5e-9, 400.0] {
            let s = format_value(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn grid_spec_parsing() {
        let (axis, start, stop, count) = parse_grid_spec("theta=0:1:101").unwrap();
        assert_eq!(axis, "theta");
        assert_eq!((start, stop, count), (0.0, 1.0, 101));
        assert!(parse_grid_spec("theta=0:1").is_err());
        assert!(parse_grid_spec("nope").is_err());
        assert!(parse_grid_spec("theta=0:1:0").is_err());
    }

    #[test]
    fn manifest_is_reparseable() {
        let manifest = render_manifest(
            "evolve",
            "0.1.0",
            &[
                ("g".to_string(), format_value(0.05)),
                ("theta".to_string(), format_value(0.5)),
            ],
        );
        let cfg = ConfigFile::parse(&manifest).unwrap();
        assert_eq!(cfg.get("evolve", "g").unwrap().parse::<f64>().unwrap(), 0.05);
    }
}
