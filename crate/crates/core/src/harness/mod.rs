//! Experiment orchestration: each kind samples paths, builds one stack per
//! path, feeds it to the per-cell accumulators and merges them through
//! [`Execution::map_reduce`]. Raw paths are never retained unless a dump is
//! requested.

mod config;
mod results;

use std::time::Instant;

pub use config::{load_config, load_config_with_overrides, ExperimentConfig, ExperimentKind, KEYS};
pub use results::{
    dump_path, echo_path, parse_results_csv, write_results, Check, PathDump, ResultRow, ResultSet,
    CSV_HEADER,
};

use crate::error::{LabError, Result};
use crate::estimators::{
    estimate_sup_tail, ks_test, mixing_bound_check, sign_cov_closed_form, snap_time,
    sup_abs_tail_analytic, CovAccumulator, EstimateWithCI, Moments, TauAccumulator,
};
use crate::exec::Execution;
use crate::grid::{sample_path, SeedSpec, TimeGrid};
use crate::transform::{
    iterate_transforms, levy_transform_tanaka, local_time_occupation, sign_product,
};

/// Validation thresholds.
pub mod thresholds {
    /// KS p-value floor for terminal values of `β^n`.
    pub const KS_P_MIN: f64 = 0.001;
    /// Relative tolerance on the mean quadratic variation.
    pub const QV_REL_TOL: f64 = 0.01;
    /// Pointwise tolerance for the `h^n · Δβ^0` rebuild.
    pub const IDENTITY_TOL: f64 = 1e-12;
    /// Relative tolerance between QV of an iterate and of the base (rounding only).
    pub const QV_ITERATE_REL_TOL: f64 = 1e-9;
    /// Sign covariance must sit within this many standard errors of the arcsine law.
    pub const COV_Z: f64 = 3.0;
    /// Absolute tolerance of the sup tail MC against the series.
    pub const SUP_TAIL_ABS_TOL: f64 = 0.01;
    /// Relative tolerance of the mean local time against `E L_T`.
    pub const LOCAL_TIME_REL_TOL: f64 = 0.10;
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultSet> {
    run_experiment_with(cfg, &Execution::with_workers(cfg.workers))
}

/// Runs `cfg` under an explicit schedule. Results never depend on `exec`.
pub fn run_experiment_with(cfg: &ExperimentConfig, exec: &Execution) -> Result<ResultSet> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let seeds = SeedSpec::new(cfg.seed, cfg.kind.as_str());
    let mut rs = match cfg.kind {
        ExperimentKind::Validate => run_validate(cfg, &grid, &seeds, exec)?,
        ExperimentKind::TauScan => run_tau_scan(cfg, &grid, &seeds, exec)?,
        ExperimentKind::CovDecay => run_cov_decay(cfg, &grid, &seeds, exec)?,
        ExperimentKind::SupTail => run_sup_tail(cfg, &grid, &seeds, exec)?,
    };
    if cfg.dump_paths > 0 {
        let depth = stack_depth(cfg);
        let mut dump = PathDump {
            levels: Vec::new(),
            dt: grid.dt(),
        };
        for idx in 0..cfg.dump_paths.min(cfg.paths) {
            let stack = iterate_transforms(&sample_path(&grid, &seeds, idx), depth);
            for n in 0..=depth {
                dump.levels.push((idx, n, stack.level(n).values().to_vec()));
            }
        }
        rs.dump = Some(dump);
    }
    rs.elapsed = start.elapsed();
    Ok(rs)
}

fn stack_depth(cfg: &ExperimentConfig) -> usize {
    let max_n = cfg.ns.iter().copied().max().unwrap_or(1);
    match cfg.kind {
        ExperimentKind::Validate => cfg.depth,
        ExperimentKind::TauScan => max_n,
        ExperimentKind::CovDecay => cfg.n_max.max(max_n),
        ExperimentKind::SupTail => 0,
    }
}

#[derive(Clone)]
struct ValidateAcc {
    terminals: Vec<Vec<f64>>,
    qv: Moments,
    qv_iterate_rel: f64,
    identity_err: f64,
    covs: Vec<CovAccumulator>,
    sup_hits: Vec<u64>,
    local_time: Moments,
    tanaka_diff: Moments,
}

impl ValidateAcc {
    fn merge(mut self, other: ValidateAcc) -> ValidateAcc {
        for (a, b) in self.terminals.iter_mut().zip(other.terminals) {
            a.extend(b);
        }
        self.qv = self.qv.merge(other.qv);
        self.qv_iterate_rel = self.qv_iterate_rel.max(other.qv_iterate_rel);
        self.identity_err = self.identity_err.max(other.identity_err);
        self.covs = self
            .covs
            .into_iter()
            .zip(other.covs)
            .map(|(a, b)| a.merge(b))
            .collect();
        for (a, b) in self.sup_hits.iter_mut().zip(other.sup_hits) {
            *a += b;
        }
        self.local_time = self.local_time.merge(other.local_time);
        self.tanaka_diff = self.tanaka_diff.merge(other.tanaka_diff);
        self
    }
}

fn run_validate(
    cfg: &ExperimentConfig,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<ResultSet> {
    let depth = cfg.depth;
    let eps = cfg.bandwidth();
    let r_indices: Vec<usize> = cfg
        .rs
        .iter()
        .map(|&r| snap_time(grid, r).map_err(|e| e.in_cell(format!("r={r}"))))
        .collect::<Result<_>>()?;
    let identity = ValidateAcc {
        terminals: vec![Vec::new(); depth],
        qv: Moments::default(),
        qv_iterate_rel: 0.0,
        identity_err: 0.0,
        covs: r_indices
            .iter()
            .map(|&i| CovAccumulator::new(i, 1))
            .collect(),
        sup_hits: vec![0; cfg.cs.len()],
        local_time: Moments::default(),
        tanaka_diff: Moments::default(),
    };

    let acc = exec.map_reduce(
        cfg.paths,
        || identity.clone(),
        |acc, idx| {
            let base = sample_path(grid, seeds, idx);
            let stack = iterate_transforms(&base, depth);
            let qv0 = base.quadratic_variation();
            acc.qv.push(qv0);
            for n in 1..=depth {
                let level = stack.level(n);
                acc.terminals[n - 1].push(level.terminal());
                let rel = (level.quadratic_variation() - qv0).abs() / qv0.max(f64::MIN_POSITIVE);
                acc.qv_iterate_rel = acc.qv_iterate_rel.max(rel);
            }
            for n in 0..=depth {
                let rebuilt = sign_product(&stack, n)?.integrate(stack.base_increments())?;
                let err = rebuilt
                    .values()
                    .iter()
                    .zip(stack.level(n).values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                acc.identity_err = acc.identity_err.max(err);
            }
            for cov in &mut acc.covs {
                cov.add(&stack);
            }
            let sup = base.sup_abs();
            for (h, &c) in acc.sup_hits.iter_mut().zip(&cfg.cs) {
                if sup > c {
                    *h += 1;
                }
            }
            acc.local_time
                .push(local_time_occupation(&base, eps)?.terminal());
            if depth >= 1 {
                let tanaka = levy_transform_tanaka(&base, eps)?;
                acc.tanaka_diff
                    .push((tanaka.terminal() - stack.level(1).terminal()).abs());
            }
            Ok(())
        },
        ValidateAcc::merge,
    )?;

    use thresholds::*;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let horizon = grid.horizon();

    for (k, terminals) in acc.terminals.iter().enumerate() {
        let n = k + 1;
        let ks = ks_test(terminals, horizon)?;
        rows.push(ResultRow::new(cfg, "ks_pvalue", ks.p_value, cfg.paths).at_n(n));
        rows.push(ResultRow::new(cfg, "ks_statistic", ks.statistic, cfg.paths).at_n(n));
        checks.push(Check::new(
            format!("ks_pvalue[n={n}]"),
            ks.p_value > KS_P_MIN,
            format!("p={} D={} threshold={KS_P_MIN}", ks.p_value, ks.statistic),
        ));
    }

    let qv = acc.qv.estimate("qv_mean");
    checks.push(Check::new(
        "qv_mean",
        (qv.value - horizon).abs() <= QV_REL_TOL * horizon,
        format!("value={} target={horizon} rel_tol={QV_REL_TOL}", qv.value),
    ));
    rows.push(ResultRow::from_estimate(cfg, &qv));

    rows.push(ResultRow::new(
        cfg,
        "qv_iterate_max_rel_diff",
        acc.qv_iterate_rel,
        cfg.paths,
    ));
    checks.push(Check::new(
        "qv_iterate_max_rel_diff",
        acc.qv_iterate_rel <= QV_ITERATE_REL_TOL,
        format!(
            "value={} threshold={QV_ITERATE_REL_TOL}",
            acc.qv_iterate_rel
        ),
    ));

    rows.push(ResultRow::new(
        cfg,
        "identity_max_error",
        acc.identity_err,
        cfg.paths,
    ));
    checks.push(Check::new(
        "identity_max_error",
        acc.identity_err <= IDENTITY_TOL,
        format!("value={} threshold={IDENTITY_TOL}", acc.identity_err),
    ));

    for (cov_acc, &r) in acc.covs.iter().zip(&cfg.rs) {
        let series = cov_acc.finish(grid, r);
        let est = &series.entries[&1];
        let closed = sign_cov_closed_form(series.r / horizon)?;
        rows.push(
            ResultRow::from_estimate(cfg, est)
                .with_label("sign_cov_n1")
                .at_r(series.r)
                .at_n(1),
        );
        rows.push(
            ResultRow::new(cfg, "sign_cov_closed_form", closed, cfg.paths)
                .at_r(series.r)
                .at_n(1),
        );
        checks.push(Check::new(
            format!("sign_cov_n1[r={}]", series.r),
            (est.value - closed).abs() <= COV_Z * est.std_error,
            format!(
                "value={} se={} closed_form={closed} z={COV_Z}",
                est.value, est.std_error
            ),
        ));
    }

    for (&hits, &c) in acc.sup_hits.iter().zip(&cfg.cs) {
        let mc = EstimateWithCI::from_count("sup_tail_mc", hits, cfg.paths);
        let analytic = sup_abs_tail_analytic(c / horizon.sqrt())?;
        rows.push(ResultRow::from_estimate(cfg, &mc).at_c(c));
        rows.push(ResultRow::new(cfg, "sup_tail_analytic", analytic, cfg.paths).at_c(c));
        checks.push(Check::new(
            format!("sup_tail[C={c}]"),
            (mc.value - analytic).abs() <= SUP_TAIL_ABS_TOL,
            format!("mc={} analytic={analytic} tol={SUP_TAIL_ABS_TOL}", mc.value),
        ));
    }

    let lt = acc.local_time.estimate("local_time_mean");
    let lt_target = (2.0 * horizon / std::f64::consts::PI).sqrt();
    checks.push(Check::new(
        "local_time_mean",
        (lt.value - lt_target).abs() <= LOCAL_TIME_REL_TOL * lt_target,
        format!(
            "value={} target={lt_target} rel_tol={LOCAL_TIME_REL_TOL}",
            lt.value
        ),
    ));
    rows.push(ResultRow::from_estimate(cfg, &lt));
    if acc.tanaka_diff.count > 0 {
        rows.push(ResultRow::from_estimate(
            cfg,
            &acc.tanaka_diff.estimate("tanaka_mean_abs_diff"),
        ));
    }

    Ok(ResultSet::new(cfg.clone(), rows, checks))
}

fn tau_rows(cfg: &ExperimentConfig, tau: &TauAccumulator) -> Vec<ResultRow> {
    tau.finish()
        .cells
        .iter()
        .map(|cell| {
            ResultRow::from_estimate(cfg, &cell.estimate)
                .at_r(cell.r)
                .at_c(cell.c)
                .at_depth(cell.depth)
        })
        .collect()
}

fn run_tau_scan(
    cfg: &ExperimentConfig,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<ResultSet> {
    let template = TauAccumulator::new(&cfg.rs, &cfg.cs, &cfg.ns)?;
    let depth = template.max_depth();
    let acc = exec.map_reduce(
        cfg.paths,
        || template.clone(),
        |acc, idx| {
            let stack = iterate_transforms(&sample_path(grid, seeds, idx), depth);
            acc.add(&stack)
                .map_err(|e| e.in_cell(format!("path {idx}")))
        },
        TauAccumulator::merge,
    )?;
    Ok(ResultSet::new(cfg.clone(), tau_rows(cfg, &acc), Vec::new()))
}

fn run_cov_decay(
    cfg: &ExperimentConfig,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<ResultSet> {
    let tau_template = TauAccumulator::new(&cfg.rs, &cfg.cs, &cfg.ns)?;
    let depth = cfg.n_max.max(tau_template.max_depth());
    let cov_template: Vec<CovAccumulator> = cfg
        .rs
        .iter()
        .map(|&r| {
            snap_time(grid, r)
                .map(|i| CovAccumulator::new(i, cfg.n_max))
                .map_err(|e| e.in_cell(format!("r={r}")))
        })
        .collect::<Result<_>>()?;

    let (covs, tau) = exec.map_reduce(
        cfg.paths,
        || (cov_template.clone(), tau_template.clone()),
        |(covs, tau), idx| {
            let stack = iterate_transforms(&sample_path(grid, seeds, idx), depth);
            covs.iter_mut().for_each(|c| c.add(&stack));
            tau.add(&stack)
                .map_err(|e| e.in_cell(format!("path {idx}")))
        },
        |(ca, ta), (cb, tb)| {
            (
                ca.into_iter().zip(cb).map(|(a, b)| a.merge(b)).collect(),
                ta.merge(tb),
            )
        },
    )?;

    let mut rows = tau_rows(cfg, &tau);
    let mut checks = Vec::new();
    let scan = tau.finish();
    let sup_tails: Vec<f64> = cfg
        .cs
        .iter()
        .map(|&c| sup_abs_tail_analytic(c))
        .collect::<Result<_>>()?;
    for (&c, &tail) in cfg.cs.iter().zip(&sup_tails) {
        rows.push(ResultRow::new(cfg, "sup_tail_analytic", tail, cfg.paths).at_c(c));
    }

    for (acc, &r) in covs.iter().zip(&cfg.rs) {
        let series = acc.finish(grid, r);
        for (&n, est) in &series.entries {
            rows.push(ResultRow::from_estimate(cfg, est).at_r(series.r).at_n(n));
        }
        rows.push(
            ResultRow::new(
                cfg,
                "sign_cov_closed_form",
                sign_cov_closed_form(series.r)?,
                cfg.paths,
            )
            .at_r(series.r)
            .at_n(1),
        );
        for (&c, &tail) in cfg.cs.iter().zip(&sup_tails) {
            for &n_depth in &cfg.ns {
                let cell = scan.cell(r, c, n_depth).ok_or_else(|| {
                    LabError::invalid("missing τ cell").in_cell(format!("r={r} C={c} N={n_depth}"))
                })?;
                let rep = mixing_bound_check(&series, cell, tail)
                    .map_err(|e| e.in_cell(format!("r={r} C={c} N={n_depth}")))?;
                rows.push(
                    ResultRow::new(cfg, "mixing_bound_rhs", rep.rhs, cfg.paths)
                        .with_std_error(rep.slack / 3.0)
                        .at_r(r)
                        .at_c(c)
                        .at_depth(n_depth)
                        .at_n(rep.n),
                );
                rows.push(
                    ResultRow::new(
                        cfg,
                        "mixing_bound_pass",
                        if rep.pass { 1.0 } else { 0.0 },
                        cfg.paths,
                    )
                    .at_r(r)
                    .at_c(c)
                    .at_depth(n_depth)
                    .at_n(rep.n),
                );
                checks.push(Check::new(
                    format!("mixing_bound[r={r},C={c},N={n_depth},n={}]", rep.n),
                    rep.pass,
                    format!(
                        "|cov|={} rhs={} slack={}",
                        rep.cov_value.abs(),
                        rep.rhs,
                        rep.slack
                    ),
                ));
            }
        }
    }
    Ok(ResultSet::new(cfg.clone(), rows, checks))
}

fn run_sup_tail(
    cfg: &ExperimentConfig,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<ResultSet> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let horizon = grid.horizon();
    for (c, mc) in estimate_sup_tail(&cfg.cs, cfg.paths, grid, seeds, exec)? {
        let analytic = sup_abs_tail_analytic(c / horizon.sqrt())?;
        checks.push(Check::new(
            format!("sup_tail[C={c}]"),
            (mc.value - analytic).abs() <= thresholds::SUP_TAIL_ABS_TOL,
            format!("mc={} analytic={analytic}", mc.value),
        ));
        rows.push(ResultRow::from_estimate(cfg, &mc).at_c(c));
        rows.push(ResultRow::new(cfg, "sup_tail_analytic", analytic, cfg.paths).at_c(c));
    }
    Ok(ResultSet::new(cfg.clone(), rows, checks))
}
