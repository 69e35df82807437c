mod common;

use common::{rel_err, taylor_reference};
use pantograph_core::{
    delayed_value, evaluate_series, integrate, transition_index, uses_predicted_delay,
    PantographParams, SeriesOptions, SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solve(a: f64, b: f64, q: f64, h: f64, t: f64) -> Vec<f64> {
    let p = PantographParams::new(a, b, q).unwrap();
    let cfg = SolverConfig::new(h, t, 1.0).unwrap();
    integrate(|x, xd| p.rhs(x, xd), q, &cfg)
        .unwrap()
        .values()
        .to_vec()
}

#[test]
fn second_order_convergence() {
    let (a, b, q, t) = (-1.0, 0.25, 0.5, 2.0);
    let p = PantographParams::new(a, b, q).unwrap();
    let exact = evaluate_series(&p, 1.0, t, &SeriesOptions::default())
        .unwrap()
        .value;
    assert!(rel_err(exact, taylor_reference(a, b, q, 1.0, t)) < 1e-13);
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        .iter()
        .map(|&h| (solve(a, b, q, h, t).last().unwrap() - exact).abs())
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (3.4..=4.6).contains(&ratio),
            "ratio {ratio} from {errors:?}"
        );
    }
}

#[test]
fn agrees_with_series_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut checked = 0;
    for _ in 0..20 {
        let a = rng.gen_range(-3.0..3.0);
        let b = rng.gen_range(-3.0..3.0);
        let q = rng.gen_range(0.05..0.95);
        let p = PantographParams::new(a, b, q).unwrap();
        let traj = solve(a, b, q, 1e-3, 2.0);
        for (t, idx) in [(0.5, 500), (1.0, 1000), (2.0, 2000)] {
            let s = evaluate_series(&p, 1.0, t, &SeriesOptions::default()).unwrap();
            if s.saturated {
                continue;
            }
            let err = rel_err(traj[idx], s.value);
            assert!(
                err < 1e-3,
                "(a={a}, b={b}, q={q}) t={t}: {} vs {}",
                traj[idx],
                s.value
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 60);
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let one = solve(-3.0, -3.5, 0.9, 1e-3, 20.0);
    let two = solve(-3.0, -3.5, 0.9, 1e-3, 20.0);
    assert!(one
        .iter()
        .zip(&two)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}

proptest! {
    #[test]
    fn grid_hits_are_exact(values in prop::collection::vec(-1e3..1e3f64, 12..40), num in 1u32..10, den in 2u32..11) {
        prop_assume!(num < den);
        let q = num as f64 / den as f64;
        for k in 1..values.len() / den as usize {
            let n = k * den as usize;
            let m = k * num as usize;
            prop_assert_eq!(delayed_value(&values, q, n).unwrap().to_bits(), values[m].to_bits());
        }
    }

    #[test]
    fn interpolation_is_convex(values in prop::collection::vec(-1e6..1e6f64, 2..200), q in 0.01..0.99f64, pick in 0usize..10_000) {
        let n = pick % values.len();
        let qn = q * n as f64;
        prop_assume!((qn.floor() as usize) + 1 < values.len());
        let m = qn.floor() as usize;
        let mu = delayed_value(&values, q, n).unwrap();
        let (lo, hi) = (values[m].min(values[m + 1]), values[m].max(values[m + 1]));
        // snapping may select the neighbour above
        let hi = if m + 2 < values.len() { hi.max(values[m + 2]) } else { hi };
        prop_assert!(mu >= lo && mu <= hi, "{} not in [{}, {}]", mu, lo, hi);
    }

    #[test]
    fn predicted_delay_only_before_transition(q in 0.01..0.99f64, n in 0usize..5000) {
        if n > transition_index(q) {
            prop_assert!(!uses_predicted_delay(q, n));
        }
        if (q * (n as f64 + 1.0)) > n as f64 + 1e-9 {
            prop_assert!(uses_predicted_delay(q, n));
        }
    }

    #[test]
    fn deterministic(a in -5.0..5.0f64, b in -5.0..5.0f64, q in 0.05..0.95f64) {
        let one = solve(a, b, q, 1e-2, 5.0);
        let two = solve(a, b, q, 1e-2, 5.0);
        prop_assert!(one.iter().zip(&two).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
