use proptest::prelude::*;

use coupon_delay::alpha_solver::solve_alpha;
use coupon_delay::limit_laws::{normalization, Regime};
use coupon_delay::simulator::{format_significant, ks_statistic};
use coupon_delay::special_fn::{erlang_log_cdf, erlang_log_sf};
use coupon_delay::ProblemSize;

proptest! {
    #[test]
    fn erlang_cdf_and_sf_sum_to_one(m in 1u64..5000, scale in 0.01f64..3.0) {
        let x = scale * m as f64;
        let p = erlang_log_cdf(m, x).unwrap().exp();
        let q = erlang_log_sf(m, x).unwrap().exp();
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn alpha_solves_its_equation(log_beta in -6.0f64..8.0) {
        let beta = 10f64.powf(log_beta);
        let sol = solve_alpha(beta).unwrap();
        prop_assert!(sol.alpha > beta);
        prop_assert!(sol.residual.abs() <= 1e-12);
        // beta (1 + ln(alpha/beta)) + 1 = alpha, checked directly where it is well conditioned.
        if beta <= 100.0 {
            let lhs = beta * (1.0 + (sol.alpha / beta).ln()) + 1.0;
            prop_assert!((lhs - sol.alpha).abs() <= 1e-10 * sol.alpha);
        }
    }

    #[test]
    fn normalization_round_trips(m in 1u64..1000, n in 3u64..1_000_000, y in -5.0f64..10.0) {
        let ps = ProblemSize::new(m, n).unwrap();
        for regime in [Regime::FixedM { m }, Regime::Supercritical, Regime::Critical { beta: 1.5 }, Regime::FixedN { n }] {
            let norm = normalization(&regime, ps).unwrap();
            let back = norm.apply(norm.delay_at(y));
            prop_assert!((back - y).abs() <= 1e-8 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn significant_formatting_round_trips(x in -1e12f64..1e12) {
        let text = format_significant(x, 10);
        let parsed: f64 = text.parse().unwrap();
        prop_assert!((parsed - x).abs() <= 5e-10 * x.abs() + f64::MIN_POSITIVE);
    }

    #[test]
    fn ks_statistic_is_a_distance(mut samples in prop::collection::vec(-10.0f64..10.0, 1..200)) {
        let d = ks_statistic(&mut samples, |y| 1.0 / (1.0 + (-y).exp()));
        prop_assert!(d > 0.0 && d <= 1.0);
        prop_assert!(d >= 0.5 / samples.len() as f64);
    }
}
