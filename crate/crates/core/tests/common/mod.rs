#![allow(dead_code)]

use levylab::{PathStack, TauResult};

/// Exhaustive scan over every `(interval, n)` pair, independent of the library's early exits.
pub fn brute_force_tau(stack: &PathStack, r: f64, c: f64, depth: usize) -> TauResult {
    let grid = stack.grid();
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for i in 0..grid.steps() {
        let right = grid.time(i + 1);
        if right <= r + 1e-9 * grid.dt() {
            continue;
        }
        let barrier = c * (1.0 - right).max(0.0).sqrt();
        for n in 1..=depth {
            let v = stack.level(n).values();
            let crosses = v[i] * v[i + 1] <= 0.0;
            let far = (0..n).all(|k| {
                let w = stack.level(k).values();
                w[i].abs() > barrier && w[i + 1].abs() > barrier
            });
            if crosses && far {
                hits.push((i, n));
            }
        }
    }
    match hits.into_iter().min() {
        Some((i, n)) => TauResult::Hit {
            tau_hat: grid.time(i + 1),
            n_star: n,
            interval: i,
        },
        None => TauResult::Censored,
    }
}

/// `P(sup_{[0,1]} |B| > C)` from the reflection (image) series `4 Σ (−1)^k Φc((2k+1)C)`.
pub fn sup_tail_by_images(c: f64) -> f64 {
    let mut total = 0.0;
    for k in 0.. {
        let x = (2 * k + 1) as f64 * c;
        if x > 40.0 {
            break;
        }
        let upper = 0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2);
        total += if k % 2 == 0 { upper } else { -upper };
    }
    4.0 * total
}
