use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use crate::error::{LabError, Result};

/// One-sample Kolmogorov–Smirnov outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup_x |F_n(x) − F(x)|`.
    pub statistic: f64,
    /// Asymptotic p-value `Q_KS(√n · D)`.
    pub p_value: f64,
    pub n: usize,
}

/// CDF of the centered Gaussian with the given variance.
pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    0.5 * erfc(-x / (SQRT_2 * variance.sqrt()))
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi form, fast for small λ.
        let a = -PI * PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20u32 {
            let odd = f64::from(2 * k - 1);
            let term = (a * odd * odd).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut q = 0.0;
        for k in 1..=100u32 {
            let kf = f64::from(k);
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            q += if k % 2 == 1 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        (2.0 * q).clamp(0.0, 1.0)
    }
}

/// KS test of `samples` against `N(0, variance)`.
pub fn ks_test(samples: &[f64], variance: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(LabError::invalid("KS test needs at least one sample"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(LabError::invalid(format!(
            "reference variance must be positive, got {variance}"
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(LabError::invalid("KS samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, variance);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(n.sqrt() * statistic),
        n: sorted.len(),
    })
}
