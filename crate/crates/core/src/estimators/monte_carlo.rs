use std::collections::BTreeMap;

use crate::error::{LabError, Result};
use crate::estimators::EstimateWithCI;
use crate::exec::Execution;
use crate::grid::{sample_path, SeedSpec, TimeGrid};
use crate::hitting::tau_profile;
use crate::transform::{iterate_transforms, PathStack};

/// Nearest grid index to `r`, kept strictly inside the grid so `h^n` is defined there.
pub fn snap_time(grid: &TimeGrid, r: f64) -> Result<usize> {
    if !(r > 0.0 && r < grid.horizon()) {
        return Err(LabError::invalid(format!(
            "r must lie in (0, {}), got {r}",
            grid.horizon()
        )));
    }
    if grid.steps() < 2 {
        return Err(LabError::invalid("covariance needs at least 2 grid steps"));
    }
    Ok(grid.nearest_index(r).clamp(1, grid.steps() - 1))
}

/// `E[h^n_r h^n_1]` for `n = 0..=n_max` at one (snapped) `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSeries {
    pub r_requested: f64,
    /// Grid time actually used.
    pub r: f64,
    pub r_index: usize,
    pub entries: BTreeMap<usize, EstimateWithCI>,
}

impl CovarianceSeries {
    pub fn n_max(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }
}

/// Sums of `h^n_r · h^n_1` per order, where `h^n_1` is read at the last left endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CovAccumulator {
    r_index: usize,
    sums: Vec<i64>,
    count: u64,
}

impl CovAccumulator {
    pub fn new(r_index: usize, n_max: usize) -> Self {
        CovAccumulator {
            r_index,
            sums: vec![0; n_max + 1],
            count: 0,
        }
    }

    pub fn add(&mut self, stack: &PathStack) {
        let last = stack.grid().steps() - 1;
        let (mut h_r, mut h_1) = (1i8, 1i8);
        self.sums[0] += 1;
        for n in 1..self.sums.len() {
            let row = &stack.signs()[n - 1];
            h_r *= row[self.r_index];
            h_1 *= row[last];
            self.sums[n] += i64::from(h_r * h_1);
        }
        self.count += 1;
    }

    pub fn merge(mut self, other: CovAccumulator) -> Self {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        self.count += other.count;
        self
    }

    pub fn finish(&self, grid: &TimeGrid, r_requested: f64) -> CovarianceSeries {
        let entries = self
            .sums
            .iter()
            .enumerate()
            .map(|(n, &s)| (n, EstimateWithCI::from_sign_sum("sign_cov", s, self.count)))
            .collect();
        CovarianceSeries {
            r_requested,
            r: grid.time(self.r_index),
            r_index: self.r_index,
            entries,
        }
    }
}

/// Monte Carlo estimate of `E[h^n_r h^n_1]` for `n = 0..=n_max`.
pub fn estimate_sign_covariance(
    r: f64,
    n_max: usize,
    paths: u64,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<CovarianceSeries> {
    if paths == 0 {
        return Err(LabError::invalid("paths must be at least 1"));
    }
    let r_index = snap_time(grid, r)?;
    let acc = exec.map_reduce(
        paths,
        || CovAccumulator::new(r_index, n_max),
        |acc, idx| {
            let stack = iterate_transforms(&sample_path(grid, seeds, idx), n_max);
            acc.add(&stack);
            Ok(())
        },
        CovAccumulator::merge,
    )?;
    Ok(acc.finish(grid, r))
}

/// One `(r, C, N)` cell of a τ scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCell {
    pub r: f64,
    pub c: f64,
    pub depth: usize,
    /// Fraction of paths with a hit before the horizon.
    pub estimate: EstimateWithCI,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauScan {
    pub cells: Vec<TauCell>,
}

impl TauScan {
    pub fn cell(&self, r: f64, c: f64, depth: usize) -> Option<&TauCell> {
        self.cells
            .iter()
            .find(|x| x.depth == depth && (x.r - r).abs() < 1e-12 && (x.c - c).abs() < 1e-12)
    }
}

/// Hit counts for every `(r, C, N)` combination, evaluated on shared stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct TauAccumulator {
    rs: Vec<f64>,
    cs: Vec<f64>,
    depths: Vec<usize>,
    /// Row-major over `(r, C, N)`.
    hits: Vec<u64>,
    count: u64,
}

impl TauAccumulator {
    pub fn new(rs: &[f64], cs: &[f64], depths: &[usize]) -> Result<Self> {
        if rs.is_empty() || cs.is_empty() || depths.is_empty() {
            return Err(LabError::invalid("τ scan needs non-empty r, C and N lists"));
        }
        if let Some(r) = rs.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(LabError::invalid(format!("r must lie in (0, 1), got {r}")));
        }
        if let Some(c) = cs.iter().find(|&&c| !(c.is_finite() && c > 0.0)) {
            return Err(LabError::invalid(format!("C must be positive, got {c}")));
        }
        if depths.contains(&0) {
            return Err(LabError::invalid("N must be at least 1"));
        }
        Ok(TauAccumulator {
            rs: rs.to_vec(),
            cs: cs.to_vec(),
            depths: depths.to_vec(),
            hits: vec![0; rs.len() * cs.len() * depths.len()],
            count: 0,
        })
    }

    pub fn max_depth(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn add(&mut self, stack: &PathStack) -> Result<()> {
        let mut slot = 0;
        for &r in &self.rs {
            for &c in &self.cs {
                let profile = tau_profile(stack, r, c)?;
                for &depth in &self.depths {
                    if profile.at_depth(depth)?.is_hit() {
                        self.hits[slot] += 1;
                    }
                    slot += 1;
                }
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn merge(mut self, other: TauAccumulator) -> Self {
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self.count += other.count;
        self
    }

    pub fn finish(&self) -> TauScan {
        let mut cells = Vec::with_capacity(self.hits.len());
        let mut slot = 0;
        for &r in &self.rs {
            for &c in &self.cs {
                for &depth in &self.depths {
                    cells.push(TauCell {
                        r,
                        c,
                        depth,
                        estimate: EstimateWithCI::from_count(
                            "p_tau_lt_1",
                            self.hits[slot],
                            self.count,
                        ),
                    });
                    slot += 1;
                }
            }
        }
        TauScan { cells }
    }
}

/// Estimates `P(τ_{r,C,N} < 1)` on every cell, sharing one depth-`max N` stack per path.
pub fn estimate_tau_scan(
    rs: &[f64],
    cs: &[f64],
    depths: &[usize],
    paths: u64,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<TauScan> {
    if paths == 0 {
        return Err(LabError::invalid("paths must be at least 1"));
    }
    if (grid.horizon() - 1.0).abs() > 1e-12 {
        return Err(LabError::invalid("τ scans require a unit horizon"));
    }
    let template = TauAccumulator::new(rs, cs, depths)?;
    let depth = template.max_depth();
    let acc = exec.map_reduce(
        paths,
        || template.clone(),
        |acc, idx| {
            let stack = iterate_transforms(&sample_path(grid, seeds, idx), depth);
            acc.add(&stack)
        },
        TauAccumulator::merge,
    )?;
    Ok(acc.finish())
}

/// Monte Carlo `P(max_i |β(t_i)| > C)` for each `C`.
pub fn estimate_sup_tail(
    cs: &[f64],
    paths: u64,
    grid: &TimeGrid,
    seeds: &SeedSpec,
    exec: &Execution,
) -> Result<Vec<(f64, EstimateWithCI)>> {
    if paths == 0 {
        return Err(LabError::invalid("paths must be at least 1"));
    }
    if cs.is_empty() {
        return Err(LabError::invalid("sup tail needs at least one C"));
    }
    if let Some(c) = cs.iter().find(|&&c| !(c.is_finite() && c > 0.0)) {
        return Err(LabError::invalid(format!("C must be positive, got {c}")));
    }
    let hits = exec.map_reduce(
        paths,
        || vec![0u64; cs.len()],
        |acc, idx| {
            let sup = sample_path(grid, seeds, idx).sup_abs();
            for (h, &c) in acc.iter_mut().zip(cs) {
                if sup > c {
                    *h += 1;
                }
            }
            Ok(())
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )?;
    Ok(cs
        .iter()
        .zip(hits)
        .map(|(&c, h)| (c, EstimateWithCI::from_count("sup_tail_mc", h, paths)))
        .collect())
}

/// `|E[h^n_r h^n_1]| ≤ (1 − P(τ<1)) + P(sup|β| > C)`, checked with `3·SE` slack.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub r: f64,
    pub c: f64,
    pub depth: usize,
    pub n: usize,
    pub cov_value: f64,
    pub cov_std_error: f64,
    pub tau_value: f64,
    pub tau_std_error: f64,
    pub sup_tail: f64,
    /// `(1 − tau_value) + sup_tail`.
    pub rhs: f64,
    /// `3·√(cov_se² + tau_se²)`.
    pub slack: f64,
    pub pass: bool,
}

pub fn mixing_bound_check(
    cov: &CovarianceSeries,
    tau: &TauCell,
    sup_tail: f64,
) -> Result<BoundReport> {
    let same_r = (cov.r_requested - tau.r).abs() <= 1e-9 || (cov.r - tau.r).abs() <= 1e-9;
    if !same_r {
        return Err(LabError::invalid(format!(
            "covariance at r = {} but τ cell at r = {}",
            cov.r_requested, tau.r
        )));
    }
    let (&n, est) = cov
        .entries
        .iter()
        .next_back()
        .ok_or_else(|| LabError::invalid("empty covariance series"))?;
    let rhs = (1.0 - tau.estimate.value) + sup_tail;
    let slack = 3.0 * est.std_error.hypot(tau.estimate.std_error);
    Ok(BoundReport {
        r: tau.r,
        c: tau.c,
        depth: tau.depth,
        n,
        cov_value: est.value,
        cov_std_error: est.std_error,
        tau_value: tau.estimate.value,
        tau_std_error: tau.estimate.std_error,
        sup_tail,
        rhs,
        slack,
        pass: est.value.abs() <= rhs + slack,
    })
}
