//! Oracles and Monte Carlo estimators for the covariance `E[h^n_r h^n_1]`,
//! the stopping-time probabilities `P(τ_{r,C,N} < 1)`, the sup tail
//! `P(sup_{[0,1]} |β| > C)`, and the bound tying them together.

mod analytic;
mod ks;
mod monte_carlo;

pub use analytic::{sign_cov_closed_form, sup_abs_tail_analytic};
pub use ks::{kolmogorov_survival, ks_test, normal_cdf, KsResult};
pub use monte_carlo::{
    estimate_sign_covariance, estimate_sup_tail, estimate_tau_scan, mixing_bound_check, snap_time,
    BoundReport, CovAccumulator, CovarianceSeries, TauAccumulator, TauCell, TauScan,
};

/// Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateWithCI {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub label: String,
}

impl EstimateWithCI {
    pub fn new(label: impl Into<String>, value: f64, std_error: f64, n_samples: u64) -> Self {
        debug_assert!(std_error >= 0.0);
        debug_assert!(n_samples >= 1);
        EstimateWithCI {
            value,
            std_error,
            n_samples,
            label: label.into(),
        }
    }

    /// Mean of `n` samples in `{-1, +1}` whose sum is `sum`.
    pub fn from_sign_sum(label: impl Into<String>, sum: i64, n: u64) -> Self {
        let mean = sum as f64 / n as f64;
        let var = (1.0 - mean * mean).max(0.0) * n as f64 / n.saturating_sub(1).max(1) as f64;
        Self::new(label, mean, (var / n as f64).sqrt(), n)
    }

    /// Fraction `hits / n` with binomial standard error.
    pub fn from_count(label: impl Into<String>, hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self::new(label, p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }

    /// Half-width `z · std_error` interval.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (
            self.value - z * self.std_error,
            self.value + z * self.std_error,
        )
    }
}

/// Count, sum and sum of squares of real samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self, label: impl Into<String>) -> EstimateWithCI {
        EstimateWithCI::new(
            label,
            self.mean(),
            (self.variance() / self.count as f64).sqrt(),
            self.count,
        )
    }
}
