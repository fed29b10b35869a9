use std::f64::consts::PI;

use crate::error::{LabError, Result};

const SERIES_CUTOFF: f64 = 1e-12;

/// `P(sup_{0≤s≤1} |β_s| > C)` from the theta-function series
/// `1 − (4/π) Σ_{k≥0} (−1)^k/(2k+1) · exp(−(2k+1)²π²/(8C²))`.
///
/// The series is cut at the first term below `1e-12` in magnitude. For large
/// `C` the sum cancels to within a few ulps of 1, so the result is clamped
/// to `[0, 1]`.
pub fn sup_abs_tail_analytic(c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 {
        return Err(LabError::invalid(format!("C must be positive, got {c}")));
    }
    if c.is_infinite() {
        return Ok(0.0);
    }
    let scale = PI * PI / (8.0 * c * c);
    let mut sum = 0.0;
    for k in 0u32.. {
        let odd = f64::from(2 * k + 1);
        let term = (-scale * odd * odd).exp() / odd;
        sum += if k % 2 == 0 { term } else { -term };
        if term < SERIES_CUTOFF {
            break;
        }
    }
    Ok((1.0 - 4.0 / PI * sum).clamp(0.0, 1.0))
}

/// `E[sign β_r · sign β_1] = (2/π) arcsin √r`.
pub fn sign_cov_closed_form(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(LabError::invalid(format!("r must lie in (0, 1], got {r}")));
    }
    Ok(2.0 / PI * r.sqrt().asin())
}
