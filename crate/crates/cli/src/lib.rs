//! Command-line surface for levylab: experiment subcommands and the plot emitter.

pub mod plot;

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand as ClapSubcommand};
use levylab::harness::{load_config_with_overrides, run_experiment, write_results, ExperimentKind};

pub use plot::{emit_plot, render_svg, PlotKind};

#[derive(Debug, Parser)]
#[command(
    name = "levylab",
    version,
    about = "Monte Carlo experiments on the iterated Lévy transformation of Brownian motion"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, ClapSubcommand)]
enum CliCommand {
    /// Run whatever experiment the config's `kind` names.
    Simulate(RunArgs),
    /// Statistical self-test; exits nonzero if any threshold fails.
    Validate(RunArgs),
    /// Estimate P(τ_{r,C,N} < 1) over an (r, C, N) grid.
    TauScan(RunArgs),
    /// Estimate E[h^n_r h^n_1] for n up to n_max and check the mixing bound.
    CovDecay(RunArgs),
    /// Compare the Monte Carlo tail of sup|β| with the series.
    SupTail(RunArgs),
    /// Render a results CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config file of `key=value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    set: Vec<(String, String)>,
    /// Results CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Results CSV to plot.
    input: PathBuf,
    /// Plot kind; inferred from the CSV's experiment column when omitted.
    #[arg(long, value_parser = |s: &str| s.parse::<PlotKind>())]
    kind: Option<PlotKind>,
    /// SVG output path.
    #[arg(long)]
    out: PathBuf,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Validate,
    TauScan,
    CovDecay,
    SupTail,
    Plot,
}

impl Subcommand {
    /// The experiment a subcommand forces, if any.
    pub fn kind(&self) -> Option<ExperimentKind> {
        match self {
            Subcommand::Validate => Some(ExperimentKind::Validate),
            Subcommand::TauScan => Some(ExperimentKind::TauScan),
            Subcommand::CovDecay => Some(ExperimentKind::CovDecay),
            Subcommand::SupTail => Some(ExperimentKind::SupTail),
            Subcommand::Simulate | Subcommand::Plot => None,
        }
    }
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub subcommand: Subcommand,
    pub config: Option<PathBuf>,
    /// `--set` pairs in the order given.
    pub overrides: Vec<(String, String)>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    /// CSV input for `plot`.
    pub input: Option<PathBuf>,
    pub plot_kind: Option<PlotKind>,
}

/// Parses `argv` (including the program name). `--help` surfaces as a clap error of kind
/// `DisplayHelp`; `clap::Error::exit` prints it and exits 0.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (subcommand, run) = match cli.command {
        CliCommand::Simulate(a) => (Subcommand::Simulate, a),
        CliCommand::Validate(a) => (Subcommand::Validate, a),
        CliCommand::TauScan(a) => (Subcommand::TauScan, a),
        CliCommand::CovDecay(a) => (Subcommand::CovDecay, a),
        CliCommand::SupTail(a) => (Subcommand::SupTail, a),
        CliCommand::Plot(p) => {
            return Ok(Command {
                subcommand: Subcommand::Plot,
                config: None,
                overrides: Vec::new(),
                out: Some(p.out),
                workers: None,
                seed: None,
                input: Some(p.input),
                plot_kind: p.kind,
            })
        }
    };
    Ok(Command {
        subcommand,
        config: run.config,
        overrides: run.set,
        out: run.out,
        workers: run.workers,
        seed: run.seed,
        input: None,
        plot_kind: None,
    })
}

impl Command {
    /// Override layers in precedence order: subcommand kind, `--set`, dedicated flags.
    pub fn resolved_overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        if let Some(kind) = self.subcommand.kind() {
            if let Some((_, v)) = self.overrides.iter().rev().find(|(k, _)| k == "kind") {
                if v != kind.as_str() {
                    bail!("--set kind={v} conflicts with the `{kind}` subcommand");
                }
            }
            out.push(("kind".to_string(), kind.to_string()));
        }
        out.extend(self.overrides.iter().cloned());
        if let Some(seed) = self.seed {
            out.push(("seed".into(), seed.to_string()));
        }
        if let Some(workers) = self.workers {
            out.push(("workers".into(), workers.to_string()));
        }
        if let Some(path) = &self.out {
            out.push(("output".into(), path.display().to_string()));
        }
        Ok(out)
    }
}

/// Executes `cmd` and returns the process exit code.
pub fn run(cmd: &Command) -> Result<i32> {
    if cmd.subcommand == Subcommand::Plot {
        let input = cmd.input.as_deref().context("plot needs an input CSV")?;
        let out = cmd.out.as_deref().context("plot needs --out")?;
        emit_plot(input, cmd.plot_kind, out)?;
        println!("wrote {}", out.display());
        return Ok(0);
    }

    let text = match &cmd.config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => String::new(),
    };
    let cfg = load_config_with_overrides(&text, &cmd.resolved_overrides()?)?;
    let rs = run_experiment(&cfg)?;
    write_results(&rs, &cfg.output)?;
    println!(
        "{}: {} rows -> {} (config {}, {:.2}s)",
        cfg.kind,
        rs.rows.len(),
        cfg.output.display(),
        rs.config_hash,
        rs.elapsed.as_secs_f64()
    );

    let failed: Vec<_> = rs.failed_checks().collect();
    for check in &failed {
        eprintln!("FAIL\t{}\t{}", check.name, check.detail);
    }
    if cfg.kind == ExperimentKind::Validate {
        eprintln!(
            "SUMMARY\tchecks={}\tfailed={}",
            rs.checks.len(),
            failed.len()
        );
        if !failed.is_empty() {
            return Ok(1);
        }
    }
    Ok(0)
}
