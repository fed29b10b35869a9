use levylab::hitting::{tau_estimate_at_depth, tau_profile};
use levylab::transform::{iterate_transforms, levy_transform_integral, local_time_occupation};
use levylab::{sample_path, sign_product, Path, SeedSpec, TauResult, TimeGrid};
use proptest::prelude::*;

mod common;
use common::brute_force_tau;

fn arb_path(max_steps: usize) -> impl Strategy<Value = Path> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_steps).prop_map(|incs| {
        let grid = TimeGrid::unit(incs.len()).unwrap();
        Path::from_increments(grid, &incs).unwrap()
    })
}

/// Random walk with occasional exact repeats so grid zeros and ties occur.
fn arb_gritty_path(max_steps: usize) -> impl Strategy<Value = Path> {
    prop::collection::vec(
        prop_oneof![Just(0.0), Just(0.5), Just(-0.5), -1.0f64..1.0],
        1..=max_steps,
    )
    .prop_map(|incs| {
        let grid = TimeGrid::unit(incs.len()).unwrap();
        Path::from_increments(grid, &incs).unwrap()
    })
}

proptest! {
    #[test]
    fn rebuilt_iterates_match(p in arb_path(200), depth in 0usize..8) {
        let stack = iterate_transforms(&p, depth);
        for n in 0..=depth {
            let h = sign_product(&stack, n).unwrap();
            prop_assert!(h.values().iter().all(|&s| s == 1 || s == -1));
            let rebuilt = h.integrate(stack.base_increments()).unwrap();
            for (a, b) in rebuilt.values().iter().zip(stack.level(n).values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn increments_follow_sign_rule(p in arb_gritty_path(100), depth in 1usize..6) {
        let stack = iterate_transforms(&p, depth);
        let d0 = stack.base_increments();
        let mut carried = d0.to_vec();
        for n in 0..depth {
            for (i, d) in carried.iter_mut().enumerate() {
                *d *= f64::from(stack.signs()[n][i]);
            }
            // Squares of the carried increments equal those of the base exactly.
            let qv: f64 = carried.iter().map(|d| d * d).sum();
            let qv0: f64 = d0.iter().map(|d| d * d).sum();
            prop_assert_eq!(qv.to_bits(), qv0.to_bits());
            let level = stack.level(n + 1).values();
            prop_assert_eq!(level[0], 0.0);
            let mut x = 0.0;
            for (i, d) in carried.iter().enumerate() {
                x += d;
                prop_assert_eq!(level[i + 1].to_bits(), x.to_bits());
            }
        }
    }

    #[test]
    fn first_iterate_is_the_integral_form(p in arb_gritty_path(100)) {
        let stack = iterate_transforms(&p, 1);
        prop_assert_eq!(stack.level(1), &levy_transform_integral(&p));
    }

    #[test]
    fn local_time_is_nondecreasing(p in arb_path(100), eps in 0.01f64..2.0) {
        let lt = local_time_occupation(&p, eps).unwrap();
        prop_assert_eq!(lt.values()[0], 0.0);
        prop_assert!(lt.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn tau_matches_brute_force(
        p in arb_gritty_path(64),
        depth in 1usize..5,
        r in 0.01f64..0.99,
        c in 0.01f64..2.0,
    ) {
        let stack = iterate_transforms(&p, depth);
        prop_assert_eq!(tau_estimate_at_depth(&stack, r, c, depth).unwrap(), brute_force_tau(&stack, r, c, depth));
    }

    #[test]
    fn tau_monotone_in_depth_and_c(seed in any::<u64>(), r in 0.05f64..0.95, c in 0.05f64..1.5) {
        let grid = TimeGrid::unit(128).unwrap();
        let stack = iterate_transforms(&sample_path(&grid, &SeedSpec::new(seed, "prop"), 0), 8);
        let profile = tau_profile(&stack, r, c).unwrap();
        let mut prev: Option<TauResult> = None;
        for depth in 1..=8 {
            let cur = profile.at_depth(depth).unwrap();
            if let Some(prev) = prev {
                if prev.is_hit() {
                    prop_assert!(cur.is_hit());
                    prop_assert!(cur.tau_hat().unwrap() <= prev.tau_hat().unwrap());
                }
            }
            prev = Some(cur);
        }
        let low = tau_estimate_at_depth(&stack, r, c, 8).unwrap();
        let high = tau_estimate_at_depth(&stack, r, c * 1.5, 8).unwrap();
        prop_assert!(!high.is_hit() || low.is_hit());
    }
}

#[test]
fn hand_built_stack_hits_where_brute_force_does() {
    // β^1 = β^0 − 2β^0(t_1) after t_1: [0, -1, 0, 1, -1.5].
    let base = Path::from_values(vec![0.0, 1.0, 2.0, 3.0, 0.5]).unwrap();
    let stack = iterate_transforms(&base, 1);
    assert_eq!(stack.level(1).values(), &[0.0, -1.0, 0.0, 1.0, -1.5]);
    let got = levylab::tau_estimate(&stack, 0.3, 1.0).unwrap();
    assert_eq!(
        got,
        TauResult::Hit {
            tau_hat: 0.5,
            n_star: 1,
            interval: 1
        }
    );
    assert_eq!(got, brute_force_tau(&stack, 0.3, 1.0, 1));
    // A barrier above |β^0(t_1)| = 1 skips interval 1; the grid zero of β^1 at t_2 hits next.
    let later = levylab::tau_estimate(&stack, 0.3, 1.5).unwrap();
    assert_eq!(later.tau_hat(), Some(0.75));
    assert_eq!(later, brute_force_tau(&stack, 0.3, 1.5, 1));
}
