use proptest::prelude::*;

use bosonic_bounds::bounds::{
    corollary1_lower_mtn, delta_asymptotic, g, gaussian_pure_bound, solve_na_star, theorem1_bound, theorem1prime_bound,
};

/// Values from 50-digit evaluation of `g`.
const G_REFERENCE: [(f64, f64); 4] = [
    (0.5, 0.954_771_252_442_219_2),
    (1.0, 1.386_294_361_119_890_6),
    (10.0, 3.350_997_070_841_619_1),
    (1e6, 14.815_511_057_964_107),
];

#[test]
fn g_reference_values() {
    assert_eq!(g(0.0).unwrap(), 0.0);
    for (x, want) in G_REFERENCE {
        let got = g(x).unwrap();
        assert!((got - want).abs() <= 1e-15 * want.max(1.0), "g({x}) = {got}, want {want}");
    }
    assert!(g(-1e-3).is_err());
    assert!(g(f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn g_sits_between_logs(x in 1e-9f64..1e9) {
        let v = g(x).unwrap();
        prop_assert!(v >= x.ln_1p() - 1e-15);
        prop_assert!(v <= x.ln_1p() + 1.0 + 1e-12);
        // Large-x expansion g(x) = ln x + 1 + O(1/x).
        if x > 1e3 {
            prop_assert!((v - x.ln() - 1.0).abs() <= 1.0 / x);
        }
    }

    #[test]
    fn g_is_increasing_and_concave(x in 0.0f64..1e4, h in 1e-3f64..10.0) {
        let (a, b, c) = (g(x).unwrap(), g(x + h).unwrap(), g(x + 2.0 * h).unwrap());
        prop_assert!(b > a);
        prop_assert!(c - 2.0 * b + a <= 1e-12 * c.max(1.0));
    }

    #[test]
    fn derivative_matches_log_ratio(x in 1e-3f64..1e4) {
        // g'(x) = ln(1 + 1/x)
        let h = 1e-5 * x.max(1e-2);
        let fd = (g(x + h).unwrap() - g(x - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - (1.0 / x).ln_1p()).abs() <= 1e-6 * fd.max(1.0));
    }

    #[test]
    fn optimal_split_is_concave(k in 0usize..3, n in 0.5f64..500.0, h in 0.01f64..5.0) {
        let (n_a, n_b) = [(1, 2), (3, 9), (2, 5)][k];
        let f = |t: f64| solve_na_star(t, n_a, n_b).unwrap().value().unwrap();
        let h = h.min(n);
        let second = f(n + h) - 2.0 * f(n) + f(n - h);
        prop_assert!(second <= 1e-9, "second difference {second} at N = {n}");
    }

    #[test]
    fn both_shares_grow_with_total(k in 0usize..4, n in 0.1f64..1e4, step in 1e-3f64..100.0) {
        let (n_a, n_b) = [(1, 2), (3, 9), (2, 5), (1, 7)][k];
        let lo = solve_na_star(n, n_a, n_b).unwrap();
        let hi = solve_na_star(n + step, n_a, n_b).unwrap();
        prop_assert!(hi.n_a_star >= lo.n_a_star - 1e-9 * n);
        prop_assert!(hi.n_b_star() >= lo.n_b_star() - 1e-9 * n);
        // The smaller party holds more photons per mode.
        prop_assert!(lo.nu_star() >= lo.n_b_star() / n_b as f64 - 1e-9);
    }

    #[test]
    fn bounds_are_ordered(mtn in 1.0f64..1e3, n_a in 1usize..5, extra in 0usize..6) {
        let n_b = n_a + extra;
        let gauss = gaussian_pure_bound(mtn, n_a, n_b).unwrap();
        let split = theorem1prime_bound(mtn, n_a, n_b).unwrap();
        let total = theorem1_bound(mtn, n_a + n_b).unwrap();
        let tol = 1e-9 * total.max(1.0);
        prop_assert!(gauss <= split + tol, "gaussian {gauss} > split {split}");
        prop_assert!(split <= total + tol, "split {split} > total {total}");
        if extra == 0 {
            prop_assert!((split - total).abs() <= tol);
        }
    }

    #[test]
    fn swapping_parties_changes_nothing(mtn in 1.0f64..100.0, n_a in 1usize..4, n_b in 1usize..6) {
        prop_assert_eq!(theorem1prime_bound(mtn, n_a, n_b).unwrap(), theorem1prime_bound(mtn, n_b, n_a).unwrap());
        prop_assert_eq!(gaussian_pure_bound(mtn, n_a, n_b).unwrap(), gaussian_pure_bound(mtn, n_b, n_a).unwrap());
    }

    #[test]
    fn lower_noise_bound_inverts_the_exponential(ef in 0.0f64..20.0, n in 1usize..6) {
        if let Some(m) = corollary1_lower_mtn(ef, n) {
            prop_assert!(m >= 1.0);
            let back = ((m - 1.0) / 2.0).ln() * n as f64 / 2.0 + n as f64;
            prop_assert!((back - ef).abs() <= 1e-9 * ef.max(1.0));
        }
    }

    #[test]
    fn leading_delta_is_positive(mu in 0.01f64..0.99, nu in 1.0f64..1e6) {
        let d = delta_asymptotic(mu, nu);
        prop_assert!(d > 0.0 && d.is_finite());
    }
}

#[test]
fn symmetric_split_is_exact() {
    for n in [0.0, 0.1, 3.0, 17.25, 1e5] {
        for k in 1..5 {
            assert_eq!(solve_na_star(n, k, k).unwrap().n_a_star, n / 2.0);
        }
    }
}

#[test]
fn asymmetric_split_rejects_wrong_order() {
    assert!(solve_na_star(5.0, 3, 2).is_err());
    assert!(solve_na_star(-1.0, 1, 2).is_err());
    assert!(solve_na_star(f64::INFINITY, 1, 2).is_err());
}
