//! Result rows and their CSV form.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Duration;

use crate::error::{LabError, Result};
use crate::estimators::EstimateWithCI;
use crate::harness::config::ExperimentConfig;

pub const CSV_HEADER: &str = "experiment,label,r,C,N,n,value,std_error,n_samples,seed,steps,paths";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub label: String,
    pub r: Option<f64>,
    pub c: Option<f64>,
    /// Iteration depth `N`.
    pub depth: Option<usize>,
    /// Sign-product or iterate order `n`.
    pub n: Option<usize>,
    pub value: f64,
    pub std_error: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub steps: usize,
    pub paths: u64,
}

impl ResultRow {
    /// Row with no parameters, filled from `cfg`.
    pub fn new(cfg: &ExperimentConfig, label: &str, value: f64, n_samples: u64) -> Self {
        ResultRow {
            experiment: cfg.kind.to_string(),
            label: label.to_string(),
            r: None,
            c: None,
            depth: None,
            n: None,
            value,
            std_error: None,
            n_samples,
            seed: cfg.seed,
            steps: cfg.steps,
            paths: cfg.paths,
        }
    }

    pub fn from_estimate(cfg: &ExperimentConfig, est: &EstimateWithCI) -> Self {
        ResultRow {
            std_error: Some(est.std_error),
            ..Self::new(cfg, &est.label, est.value, est.n_samples)
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn at_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn at_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn at_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn at_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_std_error(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        fn opt_f(a: Option<f64>, b: Option<f64>) -> Ordering {
            match (a, b) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (a, b) => a.is_some().cmp(&b.is_some()),
            }
        }
        self.label
            .cmp(&other.label)
            .then_with(|| opt_f(self.r, other.r))
            .then_with(|| opt_f(self.c, other.c))
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| self.n.cmp(&other.n))
    }

    fn to_csv_line(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.label,
            opt(self.r),
            opt(self.c),
            opt(self.depth),
            opt(self.n),
            self.value,
            opt(self.std_error),
            self.n_samples,
            self.seed,
            self.steps,
            self.paths
        )
    }
}

/// Named threshold check attached to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Full stacks of the first few paths, kept only when `dump_paths > 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathDump {
    /// `(path index, level n, values)`.
    pub levels: Vec<(u64, usize, Vec<f64>)>,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct ResultSet {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Sorted by `(label, r, C, N, n)`.
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
    pub dump: Option<PathDump>,
    pub elapsed: Duration,
}

/// Equality ignores wall-clock time.
impl PartialEq for ResultSet {
    fn eq(&self, other: &Self) -> bool {
        self.config_hash == other.config_hash
            && self.rows == other.rows
            && self.checks == other.checks
            && self.dump == other.dump
    }
}

impl ResultSet {
    pub fn new(config: ExperimentConfig, mut rows: Vec<ResultRow>, checks: Vec<Check>) -> Self {
        rows.sort_by(ResultRow::sort_key_cmp);
        ResultSet {
            config_hash: config.config_hash(),
            config,
            rows,
            checks,
            dump: None,
            elapsed: Duration::ZERO,
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
        out
    }

    pub fn config_echo(&self) -> String {
        format!(
            "# config_hash={}\n{}",
            self.config_hash,
            self.config.to_config_text()
        )
    }
}

/// `<output>.config.echo`
pub fn echo_path(output: &FsPath) -> PathBuf {
    suffixed(output, ".config.echo")
}

/// `<output>.paths.csv`
pub fn dump_path(output: &FsPath) -> PathBuf {
    suffixed(output, ".paths.csv")
}

fn suffixed(output: &FsPath, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the results CSV, the config echo and, if present, the path dump.
pub fn write_results(rs: &ResultSet, path: &FsPath) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    fs::write(path, rs.to_csv()).map_err(|e| LabError::io(path, e))?;
    let echo = echo_path(path);
    fs::write(&echo, rs.config_echo()).map_err(|e| LabError::io(&echo, e))?;
    if let Some(dump) = &rs.dump {
        let target = dump_path(path);
        let mut text = String::from("path,n,i,t,value\n");
        for (idx, n, values) in &dump.levels {
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(text, "{idx},{n},{i},{},{v}", i as f64 * dump.dt);
            }
        }
        fs::write(&target, text).map_err(|e| LabError::io(&target, e))?;
    }
    Ok(())
}

/// Parses a results CSV. Errors name the first bad line (1-based, header is line 1).
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        Some(h) => {
            return Err(LabError::invalid(format!(
                "line 1: unexpected header `{h}`"
            )))
        }
        None => return Err(LabError::invalid("line 1: missing header")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            parse_row(line)
                .map_err(|m| LabError::invalid(format!("line {lineno}: {m}: `{line}`")))?,
        );
    }
    Ok(rows)
}

fn parse_row(line: &str) -> std::result::Result<ResultRow, String> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != 12 {
        return Err(format!("expected 12 fields, found {}", f.len()));
    }
    fn req<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("bad {name} `{s}`"))
    }
    fn opt<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<Option<T>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            req(s, name).map(Some)
        }
    }
    if f[1].is_empty() {
        return Err("empty label".into());
    }
    Ok(ResultRow {
        experiment: f[0].to_string(),
        label: f[1].to_string(),
        r: opt(f[2], "r")?,
        c: opt(f[3], "C")?,
        depth: opt(f[4], "N")?,
        n: opt(f[5], "n")?,
        value: req(f[6], "value")?,
        std_error: opt(f[7], "std_error")?,
        n_samples: req(f[8], "n_samples")?,
        seed: req(f[9], "seed")?,
        steps: req(f[10], "steps")?,
        paths: req(f[11], "paths")?,
    })
}
