use bosonic_bounds::experiments::{
    run_appendix_d, run_fig1_left, run_fig1_right, run_fig2, run_random_audit, write_outputs, AppendixDSpec, AuditKind,
    AuditSpec, Manifest, NaStarFigureSpec, SweepRow, SweepSpec,
};

/// Entropy of Binomial(N, 1/2) in nats for N = 10, 20, 40, 80, summed at 50 digits.
const BINOMIAL_ENTROPY: [f64; 4] = [1.875_953_605_246_800_5, 2.223_423_915_810_262_6, 2.570_176_159_843_809, 2.916_791_310_029_704_5];
/// Beam-splitter output entropy of |N,N>, same N, from the closed-form weights
/// `C(2k,k) C(2N-2k,N-k) / 4^N` at 50 digits.
const TWIN_ENTROPY: [f64; 4] = [2.307_478_732_387_404, 2.920_265_294_840_553_6, 3.560_330_816_038_716, 4.218_043_415_204_105_7];

fn rows_text(rows: &[SweepRow]) -> String {
    format!("{rows:?}")
}

#[test]
fn number_state_entropies_match_frozen_values() {
    let t = run_appendix_d(&AppendixDSpec::default()).unwrap();
    let ef_n0 = t.column_f64("ef_n0").unwrap();
    let ef_nn = t.column_f64("ef_nn").unwrap();
    for k in 0..4 {
        assert!((ef_n0[k] - BINOMIAL_ENTROPY[k]).abs() < 1e-12, "row {k}: {}", ef_n0[k]);
        assert!((ef_nn[k] - TWIN_ENTROPY[k]).abs() < 1e-12, "row {k}: {}", ef_nn[k]);
    }
}

#[test]
fn asymptotic_gaps_shrink() {
    let t = run_appendix_d(&AppendixDSpec::default()).unwrap();
    for col in ["gap_n0", "gap_nn"] {
        let gap = t.column_f64(col).unwrap();
        assert!(gap.windows(2).all(|w| w[1].abs() < w[0].abs()), "{col}: {gap:?}");
    }
    // The |N,0> entropy approaches the Gaussian estimate of the binomial entropy.
    let ef = t.column_f64("ef_n0").unwrap();
    let est = t.column_f64("binomial_gaussian_estimate").unwrap();
    assert!((ef[3] - est[3]).abs() < 1e-2);
}

#[test]
fn sweeps_are_deterministic() {
    for family in ["fock_N0", "squeezed_sym", "tmsv_direct"] {
        let spec = SweepSpec::new(family);
        let a = run_fig1_right(&spec).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_fig1_right(&spec).unwrap());
        assert_eq!(rows_text(&a), rows_text(&b), "{family}");
        assert!(a.iter().all(|r| r.is_ok() && r.satisfies_bound(1e-9)), "{family}");
    }
}

#[test]
fn sweep_rows_respect_the_bound() {
    let rows = run_fig1_right(&SweepSpec::new("squeezed_2s_vac")).unwrap();
    for r in &rows {
        assert!(r.is_ok(), "{}", r.status);
        assert!(r.ef_out <= r.g_in + 1e-9);
        assert!(r.ratio > 0.5 && r.ratio < 0.6, "ratio {}", r.ratio);
    }
}

#[test]
fn audit_is_independent_of_thread_count() {
    let spec = AuditSpec::gaussian(3, 500, 42);
    let a = run_random_audit(&spec).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_random_audit(&spec).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a.passed());
}

#[test]
fn fock_and_classical_audits_pass() {
    let fock = run_random_audit(&AuditSpec::fock(vec![6, 6, 4], 60, 3)).unwrap();
    assert!(fock.passed(), "{:?}", fock.violations);
    assert!(fock.checks > 0);

    let mut classical = AuditSpec::gaussian(3, 300, 5);
    classical.kind = AuditKind::GaussianClassical { noise: 0.7 };
    let report = run_random_audit(&classical).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
}

#[test]
fn nastar_tables_have_expected_shape() {
    let spec = NaStarFigureSpec::default();
    let left = run_fig1_left(&spec).unwrap();
    let right = run_fig2(&spec).unwrap();
    assert_eq!(left.rows.len(), spec.n_bs.len() * spec.nus.len());
    assert_eq!(right.rows.len(), left.rows.len());
    let exact = left.column_f64("f_bisection_per_mode").unwrap();
    let gauss = left.column_f64("gaussian_per_mode").unwrap();
    for (e, g) in exact.iter().zip(&gauss) {
        assert!(g <= &(e + 1e-9));
    }
}

#[test]
fn outputs_write_data_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = AppendixDSpec { photon_numbers: vec![4, 8] };
    let table = run_appendix_d(&spec).unwrap();
    let path = dir.path().join("gaps.csv");
    let manifest = Manifest::new("appendix-d", &spec, None, Default::default());
    write_outputs(&path, &table, &manifest).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().len(), table.header.len());
    let first: Vec<String> = reader.records().next().unwrap().unwrap().iter().map(String::from).collect();
    assert_eq!(first[0], "4");
    let ef: f64 = first[1].parse().unwrap();
    assert_eq!(ef, table.column_f64("ef_n0").unwrap()[0]);

    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gaps.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["experiment"], "appendix-d");
    assert_eq!(m["spec"]["photon_numbers"], serde_json::json!([4, 8]));
}
