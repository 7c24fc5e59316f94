use fraclangevin::kernels::{eval_g, eval_g_dt, eval_h, eval_h_dt, OrderParams};
use proptest::prelude::*;

fn s_nodes() -> impl Iterator<Item = f64> {
    (0..64).map(|j| j as f64 / 63.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn g_vanishes_on_the_boundary(alpha in 0.01f64..=1.0, beta in 2.01f64..=3.0) {
        let p = OrderParams::new(alpha, beta, 0.0).unwrap();
        for s in s_nodes() {
            prop_assert_eq!(eval_g(&p, 0.0, s).unwrap().total, 0.0);
            prop_assert_eq!(eval_g_dt(&p, 0.0, s).unwrap().total, 0.0);
            prop_assert!(eval_g(&p, 1.0, s).unwrap().total.abs() <= 1e-12);
            prop_assert!(eval_g_dt(&p, 1.0, s).unwrap().total.abs() <= 1e-10);
        }
    }

    #[test]
    fn h_is_linear_in_the_coupling(alpha in 0.05f64..=1.0, beta in 2.01f64..=3.0,
                                   gamma in -2.0f64..2.0, t in 0.0f64..1.0, s in 0.0f64..0.99) {
        prop_assume!((t - s).abs() > 1e-6);
        let unit = OrderParams::new(alpha, beta, 1.0).unwrap();
        let p = unit.with_gamma(gamma).unwrap();
        let scaled = eval_h(&p, t, s).unwrap();
        let base = eval_h(&unit, t, s).unwrap();
        prop_assert_eq!(scaled.volterra, gamma * base.volterra);
        prop_assert_eq!(scaled.fredholm, gamma * base.fredholm);
        prop_assert!((scaled.total - gamma * base.total).abs() <= 1e-14 * gamma.abs() * (base.volterra.abs() + base.fredholm.abs()));
    }

    #[test]
    fn h_fredholm_derivative_matches_finite_difference(alpha in 0.2f64..=1.0, beta in 2.01f64..=3.0,
                                                       t in 0.1f64..0.9, s in 0.0f64..0.95) {
        let p = OrderParams::new(alpha, beta, 0.7).unwrap();
        let eps = 1e-6;
        let fd = (eval_h(&p, t + eps, s).unwrap().fredholm - eval_h(&p, t - eps, s).unwrap().fredholm) / (2.0 * eps);
        let an = eval_h_dt(&p, t, s);
        if let Ok(v) = an {
            prop_assert!((v.fredholm - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{} vs {}", v.fredholm, fd);
        }
    }
}
