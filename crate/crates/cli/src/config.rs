//! Resolved run configuration: what a command actually executed with.
//!
//! Flags win over config-file values, which win over defaults. The resolved
//! config is embedded in every JSON report so a run can be reproduced from
//! its own output. Worker count and output paths are deliberately not part
//! of it: they cannot change any result, and output files must be
//! byte-identical for any `--workers`.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

/// Values a JSON config file may provide; every field is optional and any
/// matching command-line flag takes precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    pub inject: Option<Vec<u64>>,
    pub set: Option<String>,
    pub variant: Option<String>,
    pub xmax: Option<u64>,
    pub x: Option<u64>,
    pub grid: Option<Vec<u64>>,
    pub a: Option<Vec<u64>>,
    pub h: Option<Vec<u64>>,
    pub tail_threshold: Option<u64>,
    pub moment_arity: Option<u32>,
    pub k_const: Option<f64>,
    pub seed: Option<u64>,
    pub nmax: Option<u64>,
    pub sets: Option<u64>,
    pub lo: Option<u64>,
    pub hi: Option<u64>,
    pub workers: Option<usize>,
    pub segment_len: Option<usize>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }
}

/// The fully resolved configuration embedded in JSON reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub inject: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set_file: Option<String>,
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xmax: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub grid: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub coeffs: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub shifts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_threshold: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub moment_arity: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_const: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub k_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nmax: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sets: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lo: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hi: Option<u64>,
    pub segment_len: usize,
    pub format: String,
}

impl RunConfig {
    pub fn new(command: &str, variant: String, segment_len: usize, format: String) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            family: None,
            inject: Vec::new(),
            set_file: None,
            variant,
            xmax: None,
            x: None,
            grid: Vec::new(),
            coeffs: Vec::new(),
            shifts: Vec::new(),
            tail_threshold: None,
            moment_arity: None,
            k_const: None,
            k_grid: Vec::new(),
            seed: None,
            nmax: None,
            sets: None,
            lo: None,
            hi: None,
            segment_len,
            format,
        }
    }
}

/// Parses `0.5,1,2` style float lists.
pub fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<f64>()
                .with_context(|| format!("bad number {part:?}"))?,
        );
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

/// Parses `6,35,143` style lists.
pub fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<u64>()
                .with_context(|| format!("bad integer {part:?}"))?,
        );
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips_through_json() {
        let mut c = RunConfig::new("mean", "big-omega".into(), 1 << 22, "json".into());
        c.family = Some("all-primes".into());
        c.x = Some(1_000_000);
        c.grid = vec![10, 100];
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_u64_list("1,2, 3").unwrap(), vec![1, 2, 3]);
        assert!(parse_u64_list("").is_err());
        assert!(parse_u64_list("x").is_err());
    }

    #[test]
    fn file_config_rejects_unknown_fields() {
        let dir = std::env::temp_dir().join(format!("llike-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"x": 10, "bogus": 1}"#).unwrap();
        assert!(FileConfig::load(&path).is_err());
        std::fs::write(&path, r#"{"x": 10, "workers": 2}"#).unwrap();
        let c = FileConfig::load(&path).unwrap();
        assert_eq!(c.x, Some(10));
        assert_eq!(c.workers, Some(2));
        std::fs::remove_dir_all(&dir).ok();
    }
}
