//! Monte Carlo checks of the sampler, the transform and the reference formulas.

use approx::assert_abs_diff_eq;
use levylab::estimators::{sign_cov_closed_form, sup_abs_tail_analytic};
use levylab::transform::default_bandwidth;
use levylab::{
    iterate_transforms, ks_test, local_time_occupation, sample_path, Execution, SeedSpec, TimeGrid,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

mod common;
use common::sup_tail_by_images;

#[test]
fn single_step_variance_is_dt() {
    for &horizon in &[1.0, 0.25] {
        let grid = TimeGrid::new(horizon, 1).unwrap();
        let seeds = SeedSpec::new(11, "variance");
        let n = 100_000u64;
        let xs: Vec<f64> = (0..n)
            .map(|i| sample_path(&grid, &seeds, i).terminal())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(
            (var / grid.dt() - 1.0).abs() < 0.02,
            "var {var} dt {}",
            grid.dt()
        );
    }
}

#[test]
fn paths_are_reproducible_per_index() {
    let grid = TimeGrid::unit(64).unwrap();
    let seeds = SeedSpec::new(3, "repro");
    assert_eq!(
        sample_path(&grid, &seeds, 17),
        sample_path(&grid, &seeds, 17)
    );
    assert_ne!(
        sample_path(&grid, &seeds, 17),
        sample_path(&grid, &seeds, 18)
    );
    assert_ne!(
        sample_path(&grid, &seeds, 17),
        sample_path(&grid, &SeedSpec::new(3, "other"), 17)
    );
}

#[test]
fn quadratic_variation_mean_is_horizon() {
    let grid = TimeGrid::unit(1 << 12).unwrap();
    let seeds = SeedSpec::new(5, "qv");
    let n = 10_000u64;
    let total = Execution::default()
        .map_reduce(
            n,
            || 0.0,
            |acc, i| {
                *acc += sample_path(&grid, &seeds, i).quadratic_variation();
                Ok(())
            },
            |a, b| a + b,
        )
        .unwrap();
    assert!((total / n as f64 - 1.0).abs() < 0.01);
}

#[test]
fn iterates_conserve_quadratic_variation() {
    let grid = TimeGrid::unit(1 << 10).unwrap();
    let seeds = SeedSpec::new(6, "qv-iter");
    for i in 0..50 {
        let stack = iterate_transforms(&sample_path(&grid, &seeds, i), 6);
        let qv0 = stack.base().quadratic_variation();
        for n in 1..=6 {
            let qv = stack.level(n).quadratic_variation();
            assert!((qv - qv0).abs() <= 1e-9 * qv0, "n={n}: {qv} vs {qv0}");
        }
    }
}

#[test]
fn mean_local_time_matches_half_normal_mean() {
    let grid = TimeGrid::unit(1 << 16).unwrap();
    let seeds = SeedSpec::new(8, "local-time");
    let eps = default_bandwidth(&grid);
    let n = 10_000u64;
    let total = Execution::default()
        .map_reduce(
            n,
            || 0.0,
            |acc, i| {
                *acc += local_time_occupation(&sample_path(&grid, &seeds, i), eps)?.terminal();
                Ok(())
            },
            |a, b| a + b,
        )
        .unwrap();
    let expected = (2.0 / std::f64::consts::PI).sqrt();
    let mean = total / n as f64;
    assert!((mean / expected - 1.0).abs() < 0.10, "mean {mean}");
}

#[test]
fn ks_is_calibrated_under_the_null() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let reps = 1000;
    let mut below_01 = 0;
    let mut below_05 = 0;
    for _ in 0..reps {
        let xs: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = ks_test(&xs, 1.0).unwrap().p_value;
        below_01 += usize::from(p < 0.01);
        below_05 += usize::from(p < 0.05);
    }
    // Binomial(1000, 0.01) and (1000, 0.05), with generous bands.
    assert!(below_01 <= 25, "{below_01}");
    assert!((25..=80).contains(&below_05), "{below_05}");
}

#[test]
fn ks_rejects_wrong_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let xs: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
    assert!(ks_test(&xs, 1.0).unwrap().p_value > 1e-3);
    assert!(ks_test(&xs, 1.3).unwrap().p_value < 1e-6);
}

#[test]
fn sup_tail_series_matches_image_series() {
    for i in 1..=80 {
        let c = 0.05 * f64::from(i);
        let got = sup_abs_tail_analytic(c).unwrap();
        assert_abs_diff_eq!(got, sup_tail_by_images(c).clamp(0.0, 1.0), epsilon = 1e-10);
    }
}

#[test]
fn sup_tail_frozen_values() {
    assert_abs_diff_eq!(
        sup_abs_tail_analytic(1.0).unwrap(),
        0.629_222_57,
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        sup_abs_tail_analytic(1.5).unwrap(),
        0.267_215_21,
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        sup_abs_tail_analytic(2.0).unwrap(),
        0.091_000_52,
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        sup_abs_tail_analytic(3.0).unwrap(),
        0.005_399_59,
        epsilon = 1e-8
    );
    assert_eq!(sup_abs_tail_analytic(10.0).unwrap(), 0.0);
}

#[test]
fn closed_form_matches_bivariate_sampling() {
    // B_r = √r Z_1, B_1 = B_r + √(1−r) Z_2; sign(0) has probability zero here.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400_000;
    for &r in &[0.1f64, 0.25, 0.5, 0.75, 0.9] {
        let mut sum = 0i64;
        for _ in 0..n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let br = r.sqrt() * z1;
            let b1 = br + (1.0 - r).sqrt() * z2;
            sum += if (br > 0.0) == (b1 > 0.0) { 1 } else { -1 };
        }
        let m = sum as f64 / f64::from(n);
        let se = ((1.0 - m * m) / f64::from(n)).sqrt();
        let exact = sign_cov_closed_form(r).unwrap();
        assert!((m - exact).abs() < 4.0 * se, "r={r}: {m} vs {exact}");
    }
    assert_abs_diff_eq!(
        sign_cov_closed_form(0.25).unwrap(),
        1.0 / 3.0,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(sign_cov_closed_form(0.5).unwrap(), 0.5, epsilon = 1e-15);
    assert_eq!(sign_cov_closed_form(1.0).unwrap(), 1.0);
}
