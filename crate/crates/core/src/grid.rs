//! Uniform time grids and reproducible Brownian path streams.
//!
//! Every path is drawn from its own ChaCha8 stream: the key is derived from
//! `(seed, label)` and the stream number is the path index, so path `i` is the
//! same array no matter which worker generates it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Uniform partition of `[0, horizon]` into `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

pub fn make_grid(horizon: f64, steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, steps)
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(LabError::invalid(format!(
                "horizon must be a positive finite time, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(LabError::invalid("steps must be at least 1"));
        }
        Ok(TimeGrid {
            horizon,
            steps,
            dt: horizon / steps as f64,
        })
    }

    /// Unit horizon with `steps` intervals.
    pub fn unit(steps: usize) -> Result<Self> {
        Self::new(1.0, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of grid point `i`. The last point is exactly the horizon.
    pub fn time(&self, i: usize) -> f64 {
        if i >= self.steps {
            self.horizon
        } else {
            i as f64 * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.time(i))
    }

    /// Index of the grid point closest to `t` (ties round away from zero), clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = (t / self.dt).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.steps)
        }
    }
}

/// One scalar path sampled on a [`TimeGrid`]; `values[i]` is the value at `t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::invalid(format!(
                "path has {} values but the grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::invalid(format!("path value {i} is not finite")));
        }
        Ok(Path { grid, values })
    }

    /// Builds a path on a unit-horizon grid sized to fit `values`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let steps = values.len().saturating_sub(1);
        let grid = TimeGrid::unit(steps)?;
        Self::new(grid, values)
    }

    /// Running sums of `increments` starting from 0.
    pub fn from_increments(grid: TimeGrid, increments: &[f64]) -> Result<Self> {
        if increments.len() != grid.steps() {
            return Err(LabError::invalid(format!(
                "{} increments for a grid with {} steps",
                increments.len(),
                grid.steps()
            )));
        }
        Ok(Path {
            grid,
            values: cumulative(increments),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn quadratic_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Keeps every `factor`-th point, giving the same path on a grid with `steps / factor` intervals.
    pub fn subsample(&self, factor: usize) -> Result<Path> {
        if factor == 0 || !self.grid.steps().is_multiple_of(factor) {
            return Err(LabError::invalid(format!(
                "subsample factor {factor} does not divide {} steps",
                self.grid.steps()
            )));
        }
        let grid = TimeGrid::new(self.grid.horizon(), self.grid.steps() / factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Path { grid, values })
    }
}

pub(crate) fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut x = 0.0;
    values.push(x);
    for d in increments {
        x += d;
        values.push(x);
    }
    values
}

/// Seed plus a domain-separating label. Distinct labels give unrelated stream families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSpec {
    seed: u64,
    label: String,
    key: [u8; 32],
}

impl SeedSpec {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(b"levylab/path-stream/v1");
        hasher.update(seed.to_le_bytes());
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        SeedSpec { seed, label, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Independent generator for `path_index`.
    pub fn stream(&self, path_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(path_index);
        rng
    }
}

/// Standard Brownian path: `values[0] = 0` and i.i.d. `N(0, dt)` increments.
pub fn sample_path(grid: &TimeGrid, seeds: &SeedSpec, path_index: u64) -> Path {
    let mut rng = seeds.stream(path_index);
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.len());
    let mut x = 0.0;
    values.push(x);
    for _ in 0..grid.steps() {
        let z: f64 = rng.sample(StandardNormal);
        x += sd * z;
        values.push(x);
    }
    Path {
        grid: *grid,
        values,
    }
}
