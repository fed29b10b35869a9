//! Flat `key=value` experiment configs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::grid::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Validate,
    TauScan,
    CovDecay,
    SupTail,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Validate,
        ExperimentKind::TauScan,
        ExperimentKind::CovDecay,
        ExperimentKind::SupTail,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Validate => "validate",
            ExperimentKind::TauScan => "tau-scan",
            ExperimentKind::CovDecay => "cov-decay",
            ExperimentKind::SupTail => "sup-tail",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let allowed: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
                format!(
                    "unknown kind `{s}`, expected one of: {}",
                    allowed.join(", ")
                )
            })
    }
}

pub const KEYS: [&str; 14] = [
    "kind",
    "horizon",
    "steps",
    "paths",
    "seed",
    "depth",
    "r",
    "C",
    "N",
    "n_max",
    "eps",
    "workers",
    "output",
    "dump_paths",
];

/// Keys that do not influence results and are left out of the config hash.
const UNHASHED: [&str; 2] = ["workers", "output"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub horizon: f64,
    pub steps: usize,
    pub paths: u64,
    pub seed: u64,
    /// Stack depth for `validate` (KS orders `1..=depth`).
    pub depth: usize,
    pub rs: Vec<f64>,
    pub cs: Vec<f64>,
    pub ns: Vec<usize>,
    pub n_max: usize,
    /// Local-time bandwidth; `None` means `dt^{1/2}`.
    pub eps: Option<f64>,
    /// `0` lets the pool pick.
    pub workers: usize,
    pub output: PathBuf,
    /// Number of leading paths whose full stacks are written next to the results.
    pub dump_paths: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            horizon: 1.0,
            steps: 4096,
            paths: 10_000,
            seed: 0,
            depth: 5,
            rs: vec![0.5],
            cs: vec![2.0],
            ns: vec![2, 4, 8, 16, 32],
            n_max: 20,
            eps: None,
            workers: 0,
            output: PathBuf::from("results.csv"),
            dump_paths: 0,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    pub fn bandwidth(&self) -> f64 {
        self.eps
            .unwrap_or_else(|| (self.horizon / self.steps as f64).sqrt())
    }

    /// Resolved config, one `key=value` per line in canonical key order.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// First 16 hex digits of SHA-256 over the result-relevant entries.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.entries() {
            if !UNHASHED.contains(&k) {
                hasher.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hasher.finalize()[..8]
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", self.kind.to_string()),
            ("horizon", self.horizon.to_string()),
            ("steps", self.steps.to_string()),
            ("paths", self.paths.to_string()),
            ("seed", self.seed.to_string()),
            ("depth", self.depth.to_string()),
            ("r", join(&self.rs)),
            ("C", join(&self.cs)),
            ("N", join(&self.ns)),
            ("n_max", self.n_max.to_string()),
            ("eps", self.bandwidth().to_string()),
            ("workers", self.workers.to_string()),
            ("output", self.output.display().to_string()),
            ("dump_paths", self.dump_paths.to_string()),
        ]
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

struct Entry {
    line: Option<usize>,
    value: String,
}

/// Parses a config document. `kind` must be present.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    load_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `overrides` (e.g. from `--set`), which win over file values.
pub fn load_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| LabError::Config {
            line: Some(line),
            key: content.to_string(),
            message: "expected `key=value`".to_string(),
        })?;
        let key = key.trim();
        check_key(key, Some(line))?;
        if entries.contains_key(key) {
            return Err(LabError::Config {
                line: Some(line),
                key: key.to_string(),
                message: "duplicate key".to_string(),
            });
        }
        entries.insert(
            key.to_string(),
            Entry {
                line: Some(line),
                value: value.trim().to_string(),
            },
        );
    }
    for (key, value) in overrides {
        let key = key.trim();
        check_key(key, None)?;
        entries.insert(
            key.to_string(),
            Entry {
                line: None,
                value: value.trim().to_string(),
            },
        );
    }
    build(&entries)
}

fn check_key(key: &str, line: Option<usize>) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(LabError::Config {
            line,
            key: key.to_string(),
            message: format!("unknown key, expected one of: {}", KEYS.join(", ")),
        })
    }
}

fn build(entries: &BTreeMap<String, Entry>) -> Result<ExperimentConfig> {
    let err = |key: &str, message: String| LabError::Config {
        line: entries.get(key).and_then(|e| e.line),
        key: key.to_string(),
        message,
    };
    let get = |key: &str| entries.get(key).map(|e| e.value.as_str());

    // Parse and range-check every present value before requiring `kind`.
    let kind: Option<ExperimentKind> = get("kind")
        .map(|v| v.parse().map_err(|m| err("kind", m)))
        .transpose()?;

    let mut cfg = ExperimentConfig::new(kind.unwrap_or(ExperimentKind::Validate));

    if let Some(v) = get("horizon") {
        cfg.horizon = parse_num(v).map_err(|m| err("horizon", m))?;
        if !(cfg.horizon.is_finite() && cfg.horizon > 0.0) {
            return Err(err("horizon", "must be a positive finite time".into()));
        }
    }
    if let Some(v) = get("steps") {
        cfg.steps = parse_num(v).map_err(|m| err("steps", m))?;
        if cfg.steps == 0 {
            return Err(err("steps", "must be at least 1".into()));
        }
    }
    if let Some(v) = get("paths") {
        cfg.paths = parse_num(v).map_err(|m| err("paths", m))?;
        if cfg.paths == 0 {
            return Err(err("paths", "must be at least 1".into()));
        }
    }
    if let Some(v) = get("seed") {
        cfg.seed = parse_num(v).map_err(|m| err("seed", m))?;
    }
    if let Some(v) = get("depth") {
        cfg.depth = parse_num(v).map_err(|m| err("depth", m))?;
        if cfg.depth == 0 {
            return Err(err("depth", "must be at least 1".into()));
        }
    }
    if let Some(v) = get("r") {
        cfg.rs = parse_list(v).map_err(|m| err("r", m))?;
        if cfg.rs.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(err("r", "every value must lie in (0, 1)".into()));
        }
    }
    if let Some(v) = get("C") {
        cfg.cs = parse_list(v).map_err(|m| err("C", m))?;
        if cfg.cs.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(err("C", "every value must be positive".into()));
        }
    }
    if let Some(v) = get("N") {
        cfg.ns = parse_list(v).map_err(|m| err("N", m))?;
        if cfg.ns.contains(&0) {
            return Err(err("N", "every depth must be at least 1".into()));
        }
    }
    if let Some(v) = get("n_max") {
        cfg.n_max = parse_num(v).map_err(|m| err("n_max", m))?;
    }
    if let Some(v) = get("eps") {
        let eps: f64 = parse_num(v).map_err(|m| err("eps", m))?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(err("eps", "must be positive".into()));
        }
        cfg.eps = Some(eps);
    }
    if let Some(v) = get("workers") {
        cfg.workers = parse_num(v).map_err(|m| err("workers", m))?;
    }
    if let Some(v) = get("output") {
        if v.is_empty() {
            return Err(err("output", "must not be empty".into()));
        }
        cfg.output = PathBuf::from(v);
    }
    if let Some(v) = get("dump_paths") {
        cfg.dump_paths = parse_num(v).map_err(|m| err("dump_paths", m))?;
    }

    if kind.is_none() {
        let allowed: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
        return Err(LabError::Config {
            line: None,
            key: "kind".to_string(),
            message: format!("missing, expected one of: {}", allowed.join(", ")),
        });
    }

    // Cross-key constraints.
    if cfg.rs.iter().any(|&r| r >= cfg.horizon) {
        return Err(err(
            "r",
            format!("every value must be below horizon {}", cfg.horizon),
        ));
    }
    let needs_unit = matches!(cfg.kind, ExperimentKind::TauScan | ExperimentKind::CovDecay);
    if needs_unit && cfg.horizon != 1.0 {
        return Err(err(
            "horizon",
            format!("{} is defined on [0, 1], horizon must be 1", cfg.kind),
        ));
    }
    if matches!(
        cfg.kind,
        ExperimentKind::Validate | ExperimentKind::CovDecay
    ) && cfg.steps < 2
    {
        return Err(err("steps", format!("{} needs at least 2 steps", cfg.kind)));
    }
    Ok(cfg)
}

fn parse_num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("malformed value `{v}`"))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    let items: Vec<&str> = v.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("malformed list `{v}`"));
    }
    items.into_iter().map(parse_num).collect()
}
