use fracvim::fracops::{
    caputo_coefficient, caputo_power, gamma, lagrange_multiplier, mittag_leffler, rl_integral_coefficient,
    rl_integral_power, LatticeExponent,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn rl_integral_semigroup(mu in 0.001f64..3.0, a in 0.001f64..3.0, b in 0.001f64..3.0) {
        let twice = rl_integral_coefficient(mu, a).unwrap().to_f64()
            * rl_integral_coefficient(mu + a, b).unwrap().to_f64();
        let once = rl_integral_coefficient(mu, a + b).unwrap().to_f64();
        prop_assert!(((twice - once) / once).abs() <= 1e-10);
    }

    #[test]
    fn caputo_left_inverts_rl(mu in 0.0f64..3.0, alpha in 0.001f64..=2.0) {
        let up = rl_integral_coefficient(mu, alpha).unwrap().to_f64();
        let down = caputo_coefficient(mu + alpha, alpha).unwrap().to_f64();
        prop_assert!((up * down - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn caputo_left_inverts_rl_on_lattice(i in 0u32..4, j in 0u32..6, alpha in 0.001f64..=2.0) {
        let mu = LatticeExponent::new(i, j);
        let up = rl_integral_power(mu, alpha).unwrap();
        let down = caputo_power(up.exponent, alpha).unwrap().unwrap();
        prop_assert_eq!(down.exponent, mu);
        prop_assert!((up.coeff.to_f64() * down.coeff.to_f64() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gamma_recurrence(z in 0.1f64..50.0) {
        let next = gamma(z + 1.0).unwrap();
        prop_assert!((next - z * gamma(z).unwrap()).abs() / next <= 1e-12);
    }

    #[test]
    fn multiplier_endpoints_are_exact(t in 1e-6f64..10.0, frac in 0.0f64..1.0) {
        let tau = t * frac;
        prop_assume!(tau < t);
        prop_assert_eq!(lagrange_multiplier(1.0, t, tau).unwrap(), -1.0);
        prop_assert_eq!(lagrange_multiplier(2.0, t, tau).unwrap(), tau - t);
    }

    #[test]
    fn multiplier_is_negative_kernel(alpha in 0.05f64..2.0, t in 0.01f64..5.0, frac in 0.0f64..0.99) {
        let tau = t * frac;
        let kernel = (t - tau).powf(alpha - 1.0) / gamma(alpha).unwrap();
        let lam = lagrange_multiplier(alpha, t, tau).unwrap();
        prop_assert!((lam + kernel).abs() <= 1e-12 * kernel.abs());
    }

    #[test]
    fn mittag_leffler_at_one_is_exponential_taylor(z in -5.0f64..5.0, n in 1usize..25) {
        let mut taylor = 0.0;
        let mut factorial = 1.0;
        for k in 0..n {
            if k > 0 {
                factorial *= k as f64;
            }
            taylor += z.powi(k as i32) / factorial;
        }
        prop_assert_eq!(mittag_leffler(1.0, z, n).unwrap().value, taylor);
    }
}
