//! The Lévy transform `Tβ = ∫ sign(β_s) dβ_s` on a grid.
//!
//! Two discrete forms are provided. The integral form is a left-point (Itô)
//! sum and is what every downstream statistic uses. The Tanaka form
//! `|β| − L̂` uses an occupation-time local time estimate and only serves as
//! a cross-check.

use crate::error::{LabError, Result};
use crate::grid::{cumulative, Path, TimeGrid};

/// How `sign` treats an exact zero. All other inputs map to their usual sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// `sign(0) = -1`.
    #[default]
    ZeroNegative,
    /// `sign(0) = +1`, for sensitivity runs.
    ZeroPositive,
}

impl SignConvention {
    #[inline]
    pub fn sign(self, x: f64) -> i8 {
        match self {
            SignConvention::ZeroNegative => {
                if x > 0.0 {
                    1
                } else {
                    -1
                }
            }
            SignConvention::ZeroPositive => {
                if x >= 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// `+1` for positive input, `-1` otherwise (zero included).
#[inline]
pub fn sign_conv(x: f64) -> i8 {
    SignConvention::default().sign(x)
}

pub fn levy_transform_integral(p: &Path) -> Path {
    levy_transform_integral_with(p, SignConvention::default())
}

/// `o[0] = 0`, `o[i+1] = o[i] + sign(p[i]) * (p[i+1] - p[i])`.
pub fn levy_transform_integral_with(p: &Path, convention: SignConvention) -> Path {
    let v = p.values();
    let increments: Vec<f64> = v
        .windows(2)
        .map(|w| f64::from(convention.sign(w[0])) * (w[1] - w[0]))
        .collect();
    Path::from_increments(*p.grid(), &increments).expect("increments match grid")
}

/// The paths `β^0..β^N` of the iterated transform over one driving path.
///
/// Increments are carried from one level to the next rather than re-derived
/// from differences, so the increment of `β^{n+1}` over `[t_i, t_{i+1}]` is
/// exactly `s[n][i]` times the stored increment of `β^n`, and `β^n` is
/// bit-identical to the running sum of `h^n · Δβ^0`.
#[derive(Debug, Clone)]
pub struct PathStack {
    base: Path,
    iterates: Vec<Path>,
    /// `signs[n][i] = sign(β^n at t_i)` for left endpoints `i < steps`, `n < depth`.
    signs: Vec<Vec<i8>>,
    base_increments: Vec<f64>,
}

impl PathStack {
    pub fn depth(&self) -> usize {
        self.iterates.len()
    }

    pub fn grid(&self) -> &TimeGrid {
        self.base.grid()
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn iterates(&self) -> &[Path] {
        &self.iterates
    }

    /// `β^n` for `0 ≤ n ≤ depth`.
    pub fn level(&self, n: usize) -> &Path {
        if n == 0 {
            &self.base
        } else {
            &self.iterates[n - 1]
        }
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    /// `Δβ^0`, as used to build every iterate.
    pub fn base_increments(&self) -> &[f64] {
        &self.base_increments
    }
}

pub fn iterate_transforms(p: &Path, depth: usize) -> PathStack {
    iterate_transforms_with(p, depth, SignConvention::default())
}

pub fn iterate_transforms_with(p: &Path, depth: usize, convention: SignConvention) -> PathStack {
    let grid = *p.grid();
    let steps = grid.steps();
    let base_increments = p.increments();
    let mut increments = base_increments.clone();
    let mut iterates: Vec<Path> = Vec::with_capacity(depth);
    let mut signs: Vec<Vec<i8>> = Vec::with_capacity(depth);

    for n in 0..depth {
        let prev = if n == 0 { p } else { &iterates[n - 1] };
        let s: Vec<i8> = prev.values()[..steps]
            .iter()
            .map(|&x| convention.sign(x))
            .collect();
        for (d, &si) in increments.iter_mut().zip(&s) {
            *d *= f64::from(si);
        }
        let next = Path::new(grid, cumulative(&increments)).expect("grid-sized iterate");
        signs.push(s);
        iterates.push(next);
    }

    PathStack {
        base: p.clone(),
        iterates,
        signs,
        base_increments,
    }
}

/// `h^n` at the left endpoint of each grid interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSeries {
    grid: TimeGrid,
    order: usize,
    h: Vec<i8>,
}

impl SignSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[i8] {
        &self.h
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Running sum of `h[i] · Δβ^0_i`, i.e. the discrete `∫ h^n dβ^0`.
    pub fn integrate(&self, base_increments: &[f64]) -> Result<Path> {
        if base_increments.len() != self.h.len() {
            return Err(LabError::invalid(format!(
                "{} increments for a sign series of length {}",
                base_increments.len(),
                self.h.len()
            )));
        }
        let inc: Vec<f64> = self
            .h
            .iter()
            .zip(base_increments)
            .map(|(&h, &d)| f64::from(h) * d)
            .collect();
        Path::from_increments(self.grid, &inc)
    }
}

/// `h^n[i] = ∏_{k<n} s[k][i]`.
pub fn sign_product(stack: &PathStack, n: usize) -> Result<SignSeries> {
    if n > stack.depth() {
        return Err(LabError::invalid(format!(
            "sign product order {n} exceeds stack depth {}",
            stack.depth()
        )));
    }
    let steps = stack.grid().steps();
    let mut h = vec![1i8; steps];
    for row in &stack.signs[..n] {
        for (hi, &s) in h.iter_mut().zip(row) {
            *hi *= s;
        }
    }
    Ok(SignSeries {
        grid: *stack.grid(),
        order: n,
        h,
    })
}

/// Occupation-time local time at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeSeries {
    grid: TimeGrid,
    eps: f64,
    values: Vec<f64>,
}

impl LocalTimeSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> f64 {
        self.eps
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
}

/// `L̂_{t_j} = (2 eps)^{-1} · dt · #{i < j : |p[i]| ≤ eps}`.
pub fn local_time_occupation(p: &Path, eps: f64) -> Result<LocalTimeSeries> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(LabError::invalid(format!(
            "local time bandwidth must be positive, got {eps}"
        )));
    }
    let grid = *p.grid();
    let weight = grid.dt() / (2.0 * eps);
    let mut values = Vec::with_capacity(grid.len());
    let mut visits = 0u64;
    values.push(0.0);
    for &x in &p.values()[..grid.steps()] {
        if x.abs() <= eps {
            visits += 1;
        }
        values.push(visits as f64 * weight);
    }
    Ok(LocalTimeSeries { grid, eps, values })
}

/// `o[i] = |p[i]| − L̂[i]`.
pub fn levy_transform_tanaka(p: &Path, eps: f64) -> Result<Path> {
    let local = local_time_occupation(p, eps)?;
    let values = p
        .values()
        .iter()
        .zip(local.values())
        .map(|(x, l)| x.abs() - l)
        .collect();
    Path::new(*p.grid(), values)
}

/// `dt^{1/2}`.
pub fn default_bandwidth(grid: &TimeGrid) -> f64 {
    grid.dt().sqrt()
}
