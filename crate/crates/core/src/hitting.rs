//! Grid detection of `τ_{r,C}`: the first time after `r` at which some iterate
//! `β^n` (`1 ≤ n ≤ N`) crosses zero while every lower iterate stays above
//! the barrier `C·√((1 − s)_+)`.
//!
//! A zero of `β^n` is read as a sign change (or exact zero) across one grid
//! interval, the barrier is evaluated at the interval's right endpoint, and
//! it must hold at both endpoints for all lower iterates.

use crate::error::{LabError, Result};
use crate::grid::{Path, TimeGrid};
use crate::transform::PathStack;

/// Slack used when comparing times with grid points.
const TIME_TOL: f64 = 1e-9;

/// Indices `i` with `t_i ≥ r` and `p[i]·p[i+1] ≤ 0`.
pub fn zero_crossing_intervals(p: &Path, from_time: f64) -> Result<Vec<usize>> {
    let grid = p.grid();
    if !(from_time >= 0.0 && from_time < grid.horizon()) {
        return Err(LabError::invalid(format!(
            "crossing scan must start in [0, {}), got {from_time}",
            grid.horizon()
        )));
    }
    let start = first_index_at_or_after(grid, from_time);
    let v = p.values();
    Ok((start..grid.steps())
        .filter(|&i| v[i] * v[i + 1] <= 0.0)
        .collect())
}

fn first_index_at_or_after(grid: &TimeGrid, t: f64) -> usize {
    let slack = TIME_TOL * grid.dt();
    (0..=grid.steps())
        .find(|&i| grid.time(i) >= t - slack)
        .unwrap_or(grid.steps() + 1)
}

/// Outcome of detecting `τ_{r,C}` at a fixed depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauResult {
    /// Hit at `tau_hat = t_{i+1}` of interval `interval`, first achieved by iterate `n_star`.
    Hit {
        tau_hat: f64,
        n_star: usize,
        interval: usize,
    },
    /// No hit before the horizon.
    Censored,
}

impl TauResult {
    pub fn is_hit(&self) -> bool {
        matches!(self, TauResult::Hit { .. })
    }

    pub fn is_censored(&self) -> bool {
        !self.is_hit()
    }

    pub fn tau_hat(&self) -> Option<f64> {
        match *self {
            TauResult::Hit { tau_hat, .. } => Some(tau_hat),
            TauResult::Censored => None,
        }
    }

    pub fn n_star(&self) -> Option<usize> {
        match *self {
            TauResult::Hit { n_star, .. } => Some(n_star),
            TauResult::Censored => None,
        }
    }
}

/// Hits of `τ_{r,C}` for every depth `1..=max_depth` from a single scan.
///
/// `records` holds `(interval, n)` pairs where `n` is the smallest successful
/// order on that interval and strictly below every earlier record. The first
/// hit at depth `N` is the first record with `n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauProfile {
    grid: TimeGrid,
    max_depth: usize,
    records: Vec<(usize, usize)>,
}

impl TauProfile {
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn at_depth(&self, depth: usize) -> Result<TauResult> {
        if depth == 0 || depth > self.max_depth {
            return Err(LabError::invalid(format!(
                "depth {depth} outside 1..={}",
                self.max_depth
            )));
        }
        Ok(self.records.iter().find(|&&(_, n)| n <= depth).map_or(
            TauResult::Censored,
            |&(i, n)| TauResult::Hit {
                tau_hat: self.grid.time(i + 1),
                n_star: n,
                interval: i,
            },
        ))
    }
}

fn check_tau_args(stack: &PathStack, r: f64, c: f64) -> Result<()> {
    if stack.depth() == 0 {
        return Err(LabError::invalid("τ detection needs a stack of depth ≥ 1"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::invalid(format!("r must lie in (0, 1), got {r}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(LabError::invalid(format!("C must be positive, got {c}")));
    }
    if (stack.grid().horizon() - 1.0).abs() > 1e-12 {
        return Err(LabError::invalid(format!(
            "τ detection is defined on [0, 1], grid horizon is {}",
            stack.grid().horizon()
        )));
    }
    Ok(())
}

/// Scans the stack once and records every improvement in the hitting order.
pub fn tau_profile(stack: &PathStack, r: f64, c: f64) -> Result<TauProfile> {
    check_tau_args(stack, r, c)?;
    let grid = *stack.grid();
    let depth = stack.depth();
    let levels: Vec<&[f64]> = (0..=depth).map(|n| stack.level(n).values()).collect();
    let slack = TIME_TOL * grid.dt();

    let mut records = Vec::new();
    // Orders at or above `best` cannot improve on an earlier record.
    let mut best = depth + 1;
    for i in 0..grid.steps() {
        let right = grid.time(i + 1);
        if right <= r + slack {
            continue;
        }
        let barrier = c * (1.0 - right).max(0.0).sqrt();
        let mut lower_min = f64::INFINITY;
        for n in 1..best {
            let below = levels[n - 1];
            lower_min = lower_min.min(below[i].abs()).min(below[i + 1].abs());
            if lower_min <= barrier {
                break;
            }
            let level = levels[n];
            if level[i] * level[i + 1] <= 0.0 {
                records.push((i, n));
                best = n;
                break;
            }
        }
        if best == 1 {
            break;
        }
    }

    Ok(TauProfile {
        grid,
        max_depth: depth,
        records,
    })
}

/// `τ_{r,C}` at the full depth of `stack`.
pub fn tau_estimate(stack: &PathStack, r: f64, c: f64) -> Result<TauResult> {
    tau_profile(stack, r, c)?.at_depth(stack.depth())
}

/// `τ_{r,C}` using only `β^0..β^depth` of `stack`.
pub fn tau_estimate_at_depth(stack: &PathStack, r: f64, c: f64, depth: usize) -> Result<TauResult> {
    tau_profile(stack, r, c)?.at_depth(depth)
}
