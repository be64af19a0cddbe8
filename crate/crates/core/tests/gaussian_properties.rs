use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bosonic_bounds::bounds::{corollary2_checks, theorem2_bound};
use bosonic_bounds::gaussian::{
    ftot_gaussian, log_negativity_gaussian, make_squeezed, make_thermal, make_tmsv, passive_symplectic,
    qcs2_gaussian, qcs2_gaussian_char_oracle, random_classical_state, random_gaussian_state, random_symplectic,
    random_unitary, GaussianState, PurityProfile, RandomStateConfig,
};
use bosonic_bounds::symplectic::{is_symplectic, symplectic_eigenvalues, symplectic_trace};
use bosonic_bounds::Bipartition;

fn mixed() -> RandomStateConfig {
    RandomStateConfig::default()
}

fn pure() -> RandomStateConfig {
    RandomStateConfig {
        profile: PurityProfile::Pure,
        ..RandomStateConfig::default()
    }
}

/// Block-diagonal symplectic acting on A and B separately.
fn local_symplectic(n_a: usize, n_b: usize, rng: &mut ChaCha8Rng) -> nalgebra::DMatrix<f64> {
    let sa = random_symplectic(n_a, 0.8, rng);
    let sb = random_symplectic(n_b, 0.8, rng);
    let n = n_a + n_b;
    let mut s = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (2 * n_a, 2 * n_a)).copy_from(&sa);
    s.view_mut((2 * n_a, 2 * n_a), (2 * n_b, 2 * n_b)).copy_from(&sb);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectrum_is_symplectic_invariant(seed in any::<u64>(), n in 1usize..=5) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let s = random_symplectic(n, 1.0, &mut rng);
        prop_assert!(is_symplectic(&s, 1e-9));
        let moved = st.apply_symplectic(&s).unwrap();
        let a = symplectic_eigenvalues(st.cov()).unwrap();
        let b = symplectic_eigenvalues(moved.cov()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn determinant_is_product_of_squared_spectrum(seed in any::<u64>(), n in 1usize..=5) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        let nu = symplectic_eigenvalues(st.cov()).unwrap();
        let prod: f64 = nu.iter().map(|x| x * x).product();
        assert_relative_eq!(st.cov().determinant(), prod, max_relative = 1e-8);
    }

    #[test]
    fn symplectic_trace_below_trace(seed in any::<u64>(), n in 1usize..=5) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        prop_assert!(symplectic_trace(st.cov()).unwrap() <= st.cov().trace() * (1.0 + 1e-12));
    }

    #[test]
    fn every_symplectic_eigenvalue_at_least_one(seed in any::<u64>(), n in 1usize..=5) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        prop_assert!(symplectic_eigenvalues(st.cov()).unwrap()[0] >= 1.0 - 1e-9);
    }

    #[test]
    fn qcs_matches_fisher_and_passive_invariance(seed in any::<u64>(), n in 1usize..=4) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        let c2 = qcs2_gaussian(&st).unwrap();
        prop_assert_eq!(c2, ftot_gaussian(&st).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let o = passive_symplectic(&random_unitary(n, &mut rng));
        let moved = st.apply_symplectic(&o).unwrap();
        assert_relative_eq!(qcs2_gaussian(&moved).unwrap(), c2, max_relative = 1e-10);
    }

    #[test]
    fn qcs_averages_over_tensor_factors(s1 in any::<u64>(), s2 in any::<u64>(), n1 in 1usize..=3, n2 in 1usize..=3) {
        let a = random_gaussian_state(n1, s1, &mixed()).unwrap();
        let b = random_gaussian_state(n2, s2, &mixed()).unwrap();
        let joint = qcs2_gaussian(&a.tensor(&b)).unwrap();
        let avg = (n1 as f64 * qcs2_gaussian(&a).unwrap() + n2 as f64 * qcs2_gaussian(&b).unwrap()) / (n1 + n2) as f64;
        assert_relative_eq!(joint, avg, max_relative = 1e-12);
    }

    #[test]
    fn log_negativity_ignores_local_operations(seed in any::<u64>(), n_a in 1usize..=2, n_b in 1usize..=2) {
        let st = random_gaussian_state(n_a + n_b, seed, &pure()).unwrap();
        let bp = Bipartition::new(n_a, n_b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let moved = st.apply_symplectic(&local_symplectic(n_a, n_b, &mut rng)).unwrap();
        let before = log_negativity_gaussian(&st, &bp).unwrap().value;
        let after = log_negativity_gaussian(&moved, &bp).unwrap().value;
        prop_assert!((before - after).abs() <= 1e-7 * before.max(1.0), "{before} vs {after}");
    }

    #[test]
    fn product_states_are_not_log_negative(s1 in any::<u64>(), s2 in any::<u64>()) {
        let st = random_gaussian_state(1, s1, &mixed()).unwrap().tensor(&random_gaussian_state(2, s2, &mixed()).unwrap());
        let en = log_negativity_gaussian(&st, &Bipartition::new(1, 2).unwrap()).unwrap();
        prop_assert_eq!(en.value, 0.0);
        prop_assert_eq!(en.n_minus, 0);
    }

    #[test]
    fn classical_states_pass_classical_checks(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_classical_state(n, 0.5, &mut rng).unwrap();
        prop_assert!(qcs2_gaussian(&st).unwrap() <= 1.0 + 1e-9);
        let bp = Bipartition::new(1, n - 1).unwrap();
        prop_assert_eq!(log_negativity_gaussian(&st, &bp).unwrap().value, 0.0);
    }

    #[test]
    fn log_negativity_bounded_by_qcs(seed in any::<u64>(), n in 2usize..=4, k in 1usize..4) {
        let st = random_gaussian_state(n, seed, &mixed()).unwrap();
        let bp = Bipartition::new(k.min(n - 1), n - k.min(n - 1)).unwrap();
        let en = log_negativity_gaussian(&st, &bp).unwrap();
        let c2 = qcs2_gaussian(&st).unwrap();
        prop_assert!(theorem2_bound(en.value, c2, n, en.n_minus).unwrap().holds);
        prop_assert!(corollary2_checks(c2, en.value, n).unwrap().holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn characteristic_function_oracle_agrees(seed in any::<u64>(), n in 1usize..=5, pure_state in any::<bool>()) {
        let config = if pure_state { pure() } else { mixed() };
        let st = random_gaussian_state(n, seed, &config).unwrap();
        let a = qcs2_gaussian(&st).unwrap();
        let b = qcs2_gaussian_char_oracle(&st).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
    }
}

#[test]
fn closed_form_families() {
    assert_relative_eq!(qcs2_gaussian(&make_thermal(&[1.0]).unwrap()).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
    for s in [0.1f64, 0.7, 1.3] {
        assert_relative_eq!(qcs2_gaussian(&make_squeezed(s, 0.4).unwrap()).unwrap(), (2.0 * s).cosh(), max_relative = 1e-12);
    }
    for r in [0.2f64, 0.9] {
        let st = make_tmsv(r).unwrap();
        assert_relative_eq!(qcs2_gaussian(&st).unwrap(), (2.0 * r).cosh(), max_relative = 1e-12);
        let en = log_negativity_gaussian(&st, &Bipartition::new(1, 1).unwrap()).unwrap();
        assert_relative_eq!(en.value, 2.0 * r, max_relative = 1e-10);
    }
    let vac = GaussianState::centered(bosonic_bounds::CovarianceMatrix::identity(3));
    assert_eq!(qcs2_gaussian(&vac).unwrap(), 1.0);
}

#[test]
fn json_roundtrip_is_exact() {
    let st = random_gaussian_state(3, 99, &mixed()).unwrap();
    let text = serde_json::to_string(&st.to_json()).unwrap();
    let back = GaussianState::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, st);
    assert_eq!(qcs2_gaussian(&back).unwrap(), qcs2_gaussian(&st).unwrap());
}
