//! Property tests for the algebraic invariants: kernel symmetries, solver
//! linearity, the group law of initial-condition shifts, monotone inversion,
//! estimator scaling, and serialization round trips.

use langevin::estimator::{estimate_continuous, mean_square_continuous};
use langevin::kernel::KernelContext;
use langevin::noise::NoiseModel;
use langevin::sampler::{Grid, PathKind, PathSample};
use langevin::solver::{shift_initial, solve_zero_start};
use proptest::prelude::*;

fn increment_model() -> impl Strategy<Value = NoiseModel> {
    prop_oneof![
        Just(NoiseModel::brownian()),
        (0.05f64..0.95).prop_map(NoiseModel::fbm),
        ((0.05f64..0.95), (0.05f64..0.95))
            .prop_map(|(a, b)| NoiseModel::mixed(vec![NoiseModel::fbm(a), NoiseModel::fbm(b)])),
    ]
}

fn any_model() -> impl Strategy<Value = NoiseModel> {
    prop_oneof![
        increment_model(),
        (0.05f64..0.95).prop_map(NoiseModel::lamperti_fbm),
        ((0.05f64..0.95), (0.05f64..1.0)).prop_map(|(h, k)| NoiseModel::lamperti_bifbm(h, k)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increment_cov_symmetric_and_diagonal(
        model in increment_model(),
        t in -20.0f64..20.0,
        s in -20.0f64..20.0,
    ) {
        let g_ts = model.increment_cov(t, s).unwrap();
        let g_st = model.increment_cov(s, t).unwrap();
        prop_assert_eq!(g_ts, g_st);
        let g_tt = model.increment_cov(t, t).unwrap();
        prop_assert_eq!(g_tt, model.variance(t).unwrap());
    }

    #[test]
    fn autocov_even_and_bounded(
        model in any_model(),
        theta in 0.2f64..3.0,
        t in 0.0f64..30.0,
    ) {
        let ctx = KernelContext::new(model, theta).unwrap();
        prop_assert_eq!(ctx.autocov(t), ctx.autocov(-t));
        prop_assert!(ctx.autocov(t).abs() <= ctx.psi() * (1.0 + 1e-9));
    }

    #[test]
    fn zero_start_cov_symmetric_and_pinned(
        model in any_model(),
        theta in 0.2f64..3.0,
        t in 0.0f64..20.0,
        s in 0.0f64..20.0,
    ) {
        let ctx = KernelContext::new(model, theta).unwrap();
        let a = ctx.zero_start_cov(t, s);
        let b = ctx.zero_start_cov(s, t);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert_eq!(ctx.zero_start_cov(0.0, s), 0.0);
    }

    #[test]
    fn psi_inverse_round_trip(
        model in any_model(),
        theta in 0.05f64..20.0,
    ) {
        let ctx = KernelContext::new(model.clone(), theta).unwrap();
        let back = ctx.psi_inverse(ctx.psi()).unwrap();
        prop_assert!((back / theta - 1.0).abs() < 1e-8, "{} -> {}", theta, back);
    }

    #[test]
    fn solver_is_linear_and_shift_is_a_group_action(
        theta in 0.2f64..3.0,
        xi in -10.0f64..10.0,
        seedish in 0u64..1000,
    ) {
        let grid = Grid::new(0.1, 64).unwrap();
        let f = |t: f64| ((seedish as f64 + 1.0) * 0.01 * t).sin() * t.sqrt();
        let g = |t: f64| (0.3 * t).cos() - 1.0;
        let mk = |h: &dyn Fn(f64) -> f64| PathSample {
            grid,
            values: grid.times().map(h).collect(),
            model: NoiseModel::brownian(),
            theta: None,
            seed: 0,
            kind: PathKind::Noise,
        };
        let xa = solve_zero_start(&mk(&f), theta).unwrap();
        let xb = solve_zero_start(&mk(&g), theta).unwrap();
        let xs = solve_zero_start(&mk(&|t| f(t) + g(t)), theta).unwrap();
        for k in 0..=grid.n() {
            let want = xa.values[k] + xb.values[k];
            prop_assert!((xs.values[k] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        let fwd = shift_initial(&xa, theta, xi);
        prop_assert!((fwd.values[0] - xi).abs() <= 1e-12 * xi.abs().max(1.0));
        let back = shift_initial(&fwd, theta, -xi);
        for k in 0..=grid.n() {
            prop_assert!(
                (back.values[k] - xa.values[k]).abs()
                    <= 1e-12 * xa.values[k].abs().max(1.0) + 1e-15
            );
        }
    }

    #[test]
    fn estimator_scale_consistency(
        scale_pow in -3i32..6,
        seedish in 0u64..100,
    ) {
        // Doubling (here: any power-of-two scaling) maps the mean square by
        // the square of the factor exactly, and the estimate accordingly.
        let grid = Grid::new(0.2, 32).unwrap();
        let base: Vec<f64> = grid
            .times()
            .map(|t| ((seedish as f64 + 2.0) * 0.07 * t).sin())
            .collect();
        let factor = 2.0f64.powi(scale_pow);
        let mk = |vals: Vec<f64>| PathSample {
            grid,
            values: vals,
            model: NoiseModel::brownian(),
            theta: None,
            seed: 0,
            kind: PathKind::ZeroStart,
        };
        let a = mk(base.clone());
        let b = mk(base.iter().map(|x| factor * x).collect());
        let ms_a = mean_square_continuous(&a);
        prop_assert_eq!(mean_square_continuous(&b), factor * factor * ms_a);
        if ms_a > 0.0 {
            let model = NoiseModel::brownian();
            let ea = estimate_continuous(&a, &model, 0.05).unwrap();
            let eb = estimate_continuous(&b, &model, 0.05).unwrap();
            // Brownian map: psi^{-1}(c^2 y) = psi^{-1}(y) / c^2.
            let want = ea.theta_hat / (factor * factor);
            prop_assert!((eb.theta_hat / want - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn model_serde_round_trip(model in any_model()) {
        let json = serde_json::to_string(&model).unwrap();
        let back: NoiseModel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(model, back);
    }

    #[test]
    fn ks_distance_lives_in_unit_interval(
        sample in prop::collection::vec(-50.0f64..50.0, 1..200),
    ) {
        let ks = langevin::harness::ks_distance(&sample).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
    }
}
