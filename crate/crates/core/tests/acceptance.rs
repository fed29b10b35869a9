//! Acceptance suite. Runs without the libtest harness so every criterion prints
//! one PASS/FAIL line even when cargo captures test output.
//!
//! Criterion 9 is exploratory: it is reported and compared against the
//! published table in `results/`, but never fails the suite.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use levylab::estimators::{estimate_sup_tail, sign_cov_closed_form, sup_abs_tail_analytic};
use levylab::harness::{load_config_with_overrides, run_experiment_with};
use levylab::hitting::tau_estimate_at_depth;
use levylab::transform::default_bandwidth;
use levylab::{
    estimate_sign_covariance, iterate_transforms, ks_test, levy_transform_integral,
    levy_transform_tanaka, load_config, run_experiment, sample_path, sign_product, tau_estimate,
    Execution, ExperimentKind, SeedSpec, TimeGrid,
};

mod common;
use common::{brute_force_tau, sup_tail_by_images};

type Outcome = Result<String, String>;

struct Report {
    failures: usize,
}

impl Report {
    fn run(&mut self, id: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = budget.filter(|b| elapsed > *b);
        let (status, detail) = match (outcome, over) {
            (Ok(d), None) => ("PASS", d),
            (Ok(d), Some(b)) => ("FAIL", format!("{d}; runtime over {:.0?}", b)),
            (Err(d), _) => ("FAIL", d),
        };
        if status == "FAIL" {
            self.failures += 1;
        }
        println!(
            "{status} criterion {id}: {detail} [{:.2}s]",
            elapsed.as_secs_f64()
        );
    }
}

fn check(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exec() -> Execution {
    Execution::default()
}

fn identity() -> Outcome {
    let grid = TimeGrid::unit(1 << 10).unwrap();
    let seeds = SeedSpec::new(1, "acceptance/identity");
    let mut worst = 0.0f64;
    for i in 0..100 {
        let stack = iterate_transforms(&sample_path(&grid, &seeds, i), 8);
        for n in 0..=8 {
            let rebuilt = sign_product(&stack, n)
                .and_then(|h| h.integrate(stack.base_increments()))
                .map_err(|e| e.to_string())?;
            for (a, b) in rebuilt.values().iter().zip(stack.level(n).values()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max |rebuilt − iterate| = {worst:e} (tol 1e-12)"),
    )
}

fn measure_preservation() -> Outcome {
    let grid = TimeGrid::unit(1 << 12).unwrap();
    let seeds = SeedSpec::new(2, "acceptance/ks");
    let terminals = exec()
        .map_reduce(
            10_000,
            || vec![Vec::new(); 5],
            |acc, i| {
                let stack = iterate_transforms(&sample_path(&grid, &seeds, i), 5);
                for (n, xs) in acc.iter_mut().enumerate() {
                    xs.push(stack.level(n + 1).terminal());
                }
                Ok(())
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| x.extend(y));
                a
            },
        )
        .map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, xs) in terminals.iter().enumerate() {
        let ks = ks_test(xs, 1.0).map_err(|e| e.to_string())?;
        pass &= ks.p_value > 0.001;
        parts.push(format!("n={} p={:.3}", n + 1, ks.p_value));
    }
    check(
        pass,
        format!("KS vs N(0,1): {} (need p > 0.001)", parts.join(", ")),
    )
}

fn arcsine() -> Outcome {
    let grid = TimeGrid::unit(1 << 12).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, &r) in [0.25, 0.5, 0.75].iter().enumerate() {
        let seeds = SeedSpec::new(30 + k as u64, "acceptance/arcsine");
        let series = estimate_sign_covariance(r, 1, 100_000, &grid, &seeds, &exec())
            .map_err(|e| e.to_string())?;
        let est = &series.entries[&1];
        let exact = sign_cov_closed_form(r).map_err(|e| e.to_string())?;
        let z = (est.value - exact) / est.std_error;
        pass &= z.abs() <= 3.0;
        parts.push(format!(
            "r={r}: {:.4} vs {:.4} (z={z:+.2})",
            est.value, exact
        ));
    }
    check(pass, format!("{} (need |z| ≤ 3)", parts.join(", ")))
}

fn sup_tail() -> Outcome {
    let grid = TimeGrid::unit(1 << 14).unwrap();
    let seeds = SeedSpec::new(4, "acceptance/sup-tail");
    let analytic = sup_abs_tail_analytic(2.0).map_err(|e| e.to_string())?;
    let images = sup_tail_by_images(2.0);
    let mc =
        estimate_sup_tail(&[2.0], 100_000, &grid, &seeds, &exec()).map_err(|e| e.to_string())?;
    let est = &mc[0].1;
    let diff = (est.value - analytic).abs();
    check(
        diff <= 0.01 && (analytic - images).abs() < 1e-10,
        format!(
            "P(sup|β| > 2): MC {:.4} ± {:.4}, series {analytic:.6}, image series {images:.6}, |diff| = {diff:.4} (tol 0.01)",
            est.value, est.std_error
        ),
    )
}

fn mixing_bound() -> Outcome {
    let cfg = load_config(
        "kind=cov-decay\nsteps=4096\npaths=10000\nseed=5\nr=0.5\nC=2\nN=32\nn_max=20\n",
    )
    .map_err(|e| e.to_string())?;
    let rs = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let get = |label: &str| {
        rs.find(label)
            .last()
            .ok_or_else(|| format!("missing row {label}"))
            .cloned()
    };
    let cov = rs
        .find("sign_cov")
        .find(|x| x.n == Some(20))
        .ok_or("missing sign_cov at n = 20")?
        .clone();
    let tau = get("p_tau_lt_1")?;
    let sup = get("sup_tail_analytic")?;
    let rhs = get("mixing_bound_rhs")?;
    let slack = 3.0
        * cov
            .std_error
            .unwrap_or(0.0)
            .hypot(tau.std_error.unwrap_or(0.0));
    let pass = cov.value.abs() <= rhs.value + slack && rs.all_checks_pass();
    check(
        pass,
        format!(
            "|cov_20| = {:.4} ≤ (1 − {:.4}) + {:.4} + {:.4} = {:.4}",
            cov.value.abs(),
            tau.value,
            sup.value,
            slack,
            rhs.value + slack
        ),
    )
}

fn tau_monotonicity() -> Outcome {
    let depths = [2, 4, 8, 16, 32];
    let grid = TimeGrid::unit(1 << 10).unwrap();
    let seeds = SeedSpec::new(6, "acceptance/monotone");
    let mut violations = 0usize;
    let mut checked = 0usize;
    for i in 0..1000 {
        // One stack per depth from the same base path, so each indicator is computed independently.
        let base = sample_path(&grid, &seeds, i);
        let stacks: Vec<_> = depths
            .iter()
            .map(|&d| iterate_transforms(&base, d))
            .collect();
        for &r in &[0.25, 0.5, 0.75, 0.9] {
            for &c in &[0.5, 1.0, 2.0, 3.0] {
                let hits: Vec<bool> = stacks
                    .iter()
                    .map(|s| tau_estimate(s, r, c).map(|t| t.is_hit()))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                violations += hits.windows(2).filter(|w| w[0] && !w[1]).count();
                checked += 1;
            }
        }
    }

    let small = TimeGrid::unit(64).unwrap();
    let seeds = SeedSpec::new(7, "acceptance/brute-force");
    let mut mismatches = 0usize;
    let mut hit_count = 0usize;
    for i in 0..1000u64 {
        let stack = iterate_transforms(&sample_path(&small, &seeds, i), 4);
        // Cycle through barrier heights and start times so both outcomes occur often.
        let r = 0.05 + 0.9 * ((i % 10) as f64) / 10.0;
        let c = [0.1, 0.25, 0.5, 1.0, 2.0][(i / 10 % 5) as usize];
        let got = tau_estimate_at_depth(&stack, r, c, 4).map_err(|e| e.to_string())?;
        hit_count += usize::from(got.is_hit());
        mismatches += usize::from(got != brute_force_tau(&stack, r, c, 4));
    }
    check(
        violations == 0 && mismatches == 0,
        format!(
            "{violations} monotonicity violations over {checked} (path, r, C) profiles; \
             {mismatches} brute-force mismatches on 1000 stacks ({hit_count} hits)"
        ),
    )
}

fn tanaka() -> Outcome {
    let fine = TimeGrid::unit(1 << 14).unwrap();
    let seeds = SeedSpec::new(8, "acceptance/tanaka");
    let factors = [4usize, 2, 1];
    let sums = exec()
        .map_reduce(
            1000,
            || [0.0; 3],
            |acc, i| {
                let base = sample_path(&fine, &seeds, i);
                for (slot, &f) in acc.iter_mut().zip(&factors) {
                    let p = base.subsample(f)?;
                    let eps = default_bandwidth(p.grid());
                    let tanaka = levy_transform_tanaka(&p, eps)?;
                    *slot += (tanaka.terminal() - levy_transform_integral(&p).terminal()).abs();
                }
                Ok(())
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
        .map_err(|e| e.to_string())?;
    let means: Vec<f64> = sums.iter().map(|s| s / 1000.0).collect();
    let pass = means.windows(2).all(|w| w[1] < w[0]);
    check(
        pass,
        format!(
            "mean |tanaka − integral| at 2^12, 2^13, 2^14: {:.5}, {:.5}, {:.5} (coupled paths)",
            means[0], means[1], means[2]
        ),
    )
}

fn determinism() -> Outcome {
    let configs = [
        "kind=validate\nsteps=256\npaths=1500\nseed=9\ndepth=4\n",
        "kind=tau-scan\nsteps=256\npaths=1500\nseed=9\nr=0.25,0.75\nC=1,2\nN=2,8\n",
        "kind=cov-decay\nsteps=256\npaths=1500\nseed=9\nr=0.5\nC=2\nN=8\nn_max=6\n",
        "kind=sup-tail\nsteps=256\npaths=1500\nseed=9\nC=1,2\n",
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for text in configs {
        let mut reference: Option<Vec<u8>> = None;
        for workers in [1usize, 2, 4, 8] {
            let cfg = load_config_with_overrides(text, &[("workers".into(), workers.to_string())])
                .map_err(|e| e.to_string())?;
            let out = dir.path().join(format!("{}-{workers}.csv", cfg.kind));
            let rs = run_experiment_with(&cfg, &Execution::with_workers(workers))
                .map_err(|e| e.to_string())?;
            levylab::write_results(&rs, &out).map_err(|e| e.to_string())?;
            let bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
            match &reference {
                None => reference = Some(bytes),
                Some(r) if *r == bytes => compared += 1,
                Some(_) => return Err(format!("{} differs with {workers} workers", cfg.kind)),
            }
        }
    }
    Ok(format!(
        "{} kinds × workers {{1, 2, 4, 8}}: {compared} byte-identical CSV comparisons",
        ExperimentKind::ALL.len()
    ))
}

fn exploratory() -> String {
    let results = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../results");
    let text = match std::fs::read_to_string(results.join("tau_scan.cfg")) {
        Ok(t) => t,
        Err(e) => return format!("no published config ({e})"),
    };
    let cfg = match load_config(&text) {
        Ok(c) => c,
        Err(e) => return format!("published config does not load: {e}"),
    };
    let rs = match run_experiment(&cfg) {
        Ok(rs) => rs,
        Err(e) => return format!("tau-scan failed: {e}"),
    };
    let depths = &cfg.ns;
    print!("\n    r     C  ");
    for n in depths {
        print!("  N={n:<4}");
    }
    println!();
    for &r in &cfg.rs {
        for &c in &cfg.cs {
            print!("  {r:<5} {c:<3}");
            for &n in depths {
                let v = rs
                    .rows
                    .iter()
                    .find(|x| x.r == Some(r) && x.c == Some(c) && x.depth == Some(n))
                    .map_or(f64::NAN, |x| x.value);
                print!("  {v:.4}");
            }
            println!();
        }
    }
    let published = std::fs::read_to_string(results.join("tau_scan.csv")).unwrap_or_default();
    let matches = published == rs.to_csv();
    format!(
        "{} cells, seed {}, {} paths at 2^{} steps; matches published results/tau_scan.csv: {}",
        rs.rows.len(),
        cfg.seed,
        cfg.paths,
        cfg.steps.trailing_zeros(),
        if matches { "yes" } else { "no" }
    )
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let secs = Duration::from_secs;
    report.run("1 (transform identity)", Some(secs(1)), identity);
    report.run(
        "2 (measure preservation)",
        Some(secs(30)),
        measure_preservation,
    );
    report.run("3 (arcsine oracle)", Some(secs(120)), arcsine);
    report.run("4 (sup-tail oracle)", Some(secs(120)), sup_tail);
    report.run("5 (mixing bound)", Some(secs(300)), mixing_bound);
    report.run("6 (τ monotonicity)", None, tau_monotonicity);
    report.run("7 (Tanaka convergence)", None, tanaka);
    report.run("8 (determinism)", None, determinism);
    let start = Instant::now();
    let detail = exploratory();
    println!(
        "REPORT criterion 9 (exploratory τ table): {detail} [{:.2}s]",
        start.elapsed().as_secs_f64()
    );
    println!(
        "\nacceptance: {} of 8 pass/fail criteria failed",
        report.failures
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
