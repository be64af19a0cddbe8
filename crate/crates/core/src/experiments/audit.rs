use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Table, Tolerances};
use crate::bounds::{
    corollary1_check, corollary2_checks, entanglement_check, g, gaussian_pure_check, theorem2_bound,
    theorem2_twomode_refined, total_noise_check, BoundCheck,
};
use crate::error::{Error, Result};
use crate::fock::{entanglement_entropy, mtn_pure, random_pure_state};
use crate::gaussian::{
    log_negativity_gaussian, qcs2_gaussian, random_classical_state, random_gaussian_state_with, PurityProfile,
    RandomStateConfig,
};
use crate::symplectic::{symplectic_eigenvalues, Bipartition};

/// Which random ensemble to audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditKind {
    /// Random Gaussian states; log-negativity versus nonclassicality, plus the
    /// entanglement-versus-noise bounds when the profile is pure.
    Gaussian(RandomStateConfig),
    /// `V = 𝟙 + AAᵀ` control group, which must look classical and separable.
    GaussianClassical { noise: f64 },
    /// Random pure Fock states; entanglement of formation versus noise.
    Fock { cutoffs: Vec<usize>, decay: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSpec {
    pub kind: AuditKind,
    pub n: usize,
    pub states: usize,
    pub seed: u64,
    /// Sizes of party A, which always takes the leading modes. All
    /// `1..n` when absent.
    pub splits: Option<Vec<usize>>,
    pub tolerances: Tolerances,
}

impl AuditSpec {
    pub fn gaussian(n: usize, states: usize, seed: u64) -> Self {
        Self {
            kind: AuditKind::Gaussian(RandomStateConfig::default()),
            n,
            states,
            seed,
            splits: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn fock(cutoffs: Vec<usize>, states: usize, seed: u64) -> Self {
        let n = cutoffs.len();
        Self {
            kind: AuditKind::Fock { cutoffs, decay: 0.3 },
            n,
            states,
            seed,
            splits: None,
            tolerances: Tolerances::default(),
        }
    }

    fn bipartitions(&self) -> Result<Vec<Bipartition>> {
        let splits = self.splits.clone().unwrap_or_else(|| (1..self.n).collect());
        if splits.is_empty() {
            return Err(Error::param("splits", "need at least one bipartition"));
        }
        splits.iter().map(|&k| Bipartition::new(k, self.n.saturating_sub(k))).collect()
    }

    fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.n < 2 {
            return Err(Error::param("n", "audits need at least two modes"));
        }
        match &self.kind {
            AuditKind::Gaussian(_) | AuditKind::GaussianClassical { .. } if self.n > 6 => {
                Err(Error::param("n", "Gaussian audits support at most 6 modes"))
            }
            AuditKind::Fock { cutoffs, decay } => {
                if self.n > 4 || cutoffs.len() != self.n {
                    return Err(Error::param("cutoffs", "Fock audits need one cutoff per mode and at most 4 modes"));
                }
                if cutoffs.iter().any(|&d| d == 0 || d > 12) {
                    return Err(Error::param("cutoffs", "Fock audit cutoffs must lie in 1..=12"));
                }
                if !(*decay >= 0.0) {
                    return Err(Error::param("decay", "must be non-negative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Margin histogram with fixed edges; `counts[k]` holds margins in
/// `[edges[k-1], edges[k])`, with open-ended first and last bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn new(tau_check: f64) -> Self {
        let edges = vec![-tau_check, 0.0, 1e-9, 1e-6, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
        let counts = vec![0; edges.len() + 1];
        Self { edges, counts }
    }

    fn add(&mut self, x: f64) {
        let k = self.edges.iter().take_while(|&&e| x >= e).count();
        self.counts[k] += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub n_a: usize,
    pub check: BoundCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightestInstance {
    pub index: usize,
    pub n_a: usize,
    pub check: BoundCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub spec: AuditSpec,
    pub checks: usize,
    pub checks_by_bound: BTreeMap<String, usize>,
    pub saturated_by_bound: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
    pub histograms: BTreeMap<String, Histogram>,
    pub tightest: BTreeMap<String, TightestInstance>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// One row per bound: counts, violations, smallest margin and where it occurred.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "bound",
            "checks",
            "violations",
            "saturated",
            "min_margin [nats]",
            "tightest_index",
            "tightest_n_a",
        ]);
        for (name, count) in &self.checks_by_bound {
            let violations = self.violations.iter().filter(|v| &v.check.provenance == name).count();
            let tight = &self.tightest[name];
            t.push(vec![
                name.as_str().into(),
                (*count).into(),
                violations.into(),
                self.saturated_by_bound.get(name).copied().unwrap_or(0).into(),
                tight.check.margin.into(),
                tight.index.into(),
                tight.n_a.into(),
            ]);
        }
        t
    }
}

/// Per-instance generator: stream `index` of a ChaCha8 generator seeded with `seed`.
pub(crate) fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn gaussian_checks(
    config: &RandomStateConfig,
    n: usize,
    bps: &[Bipartition],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, BoundCheck)>> {
    let st = random_gaussian_state_with(n, config, rng)?;
    let qcs2 = qcs2_gaussian(&st)?;
    let mut out = Vec::new();
    for bp in bps {
        let en = log_negativity_gaussian(&st, bp)?;
        out.push((bp.n_a(), theorem2_bound(en.value, qcs2, n, en.n_minus)?));
        let c2 = corollary2_checks(qcs2, en.value, n)?;
        out.extend(c2.exponential_growth.into_iter().chain(c2.separability).map(|c| (bp.n_a(), c)));
        if n == 2 && en.n_minus > 0 {
            out.push((bp.n_a(), theorem2_twomode_refined(qcs2, en.value, st.cov().determinant())?));
        }
        if config.profile == PurityProfile::Pure {
            let reduced = st.reduce(bp.a_modes())?;
            let ef = symplectic_eigenvalues(reduced.cov())?
                .iter()
                .map(|nu| g(((nu - 1.0) / 2.0).max(0.0)))
                .sum::<Result<f64>>()?;
            let mtn = st.cov().trace() / (2 * n) as f64;
            out.push((bp.n_a(), total_noise_check(ef, mtn, n)?));
            out.push((bp.n_a(), entanglement_check(ef, mtn, bp.n_a(), bp.n_b())?));
            out.push((bp.n_a(), gaussian_pure_check(ef, mtn, bp.n_a(), bp.n_b())?));
        }
    }
    Ok(out)
}

fn classical_checks(noise: f64, n: usize, bps: &[Bipartition], rng: &mut ChaCha8Rng) -> Result<Vec<(usize, BoundCheck)>> {
    let st = random_classical_state(n, noise, rng)?;
    let qcs2 = qcs2_gaussian(&st)?;
    let mut out = vec![(0, BoundCheck::new(qcs2, 1.0, "classical_qcs_at_most_one"))];
    for bp in bps {
        let en = log_negativity_gaussian(&st, bp)?;
        out.push((bp.n_a(), BoundCheck::new(en.value, 0.0, "classical_no_log_negativity")));
    }
    Ok(out)
}

fn fock_checks(
    cutoffs: &[usize],
    decay: f64,
    bps: &[Bipartition],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, BoundCheck)>> {
    let psi = random_pure_state(cutoffs, decay, rng)?;
    let n = cutoffs.len();
    let mtn = mtn_pure(&psi)?;
    let mut out = Vec::new();
    for bp in bps {
        let ef = entanglement_entropy(&psi, bp)?;
        out.push((bp.n_a(), total_noise_check(ef, mtn, n)?));
        out.push((bp.n_a(), entanglement_check(ef, mtn, bp.n_a(), bp.n_b())?));
        if let Some(c) = corollary1_check(ef, mtn, n) {
            out.push((bp.n_a(), c));
        }
    }
    Ok(out)
}

/// Draws `spec.states` seeded random states and checks every applicable
/// bound on every split. Instance `i` uses its own generator stream, so
/// results do not depend on scheduling and any instance can be replayed.
pub fn run_random_audit(spec: &AuditSpec) -> Result<AuditReport> {
    spec.validate()?;
    let bps = spec.bipartitions()?;
    let per_state: Vec<Result<Vec<(usize, BoundCheck)>>> = (0..spec.states)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(spec.seed, i);
            let res = match &spec.kind {
                AuditKind::Gaussian(config) => gaussian_checks(config, spec.n, &bps, &mut rng),
                AuditKind::GaussianClassical { noise } => classical_checks(*noise, spec.n, &bps, &mut rng),
                AuditKind::Fock { cutoffs, decay } => fock_checks(cutoffs, *decay, &bps, &mut rng),
            };
            res.map_err(|e| Error::param("state", format!("instance {i} (seed {}): {e}", spec.seed)))
        })
        .collect();

    let tol = &spec.tolerances;
    let mut report = AuditReport {
        spec: spec.clone(),
        checks: 0,
        checks_by_bound: BTreeMap::new(),
        saturated_by_bound: BTreeMap::new(),
        violations: Vec::new(),
        histograms: BTreeMap::new(),
        tightest: BTreeMap::new(),
    };
    for (index, checks) in per_state.into_iter().enumerate() {
        for (n_a, check) in checks? {
            let check = check.rejudged(tol.tau_check, tol.tau_sat);
            let name = check.provenance.clone();
            report.checks += 1;
            *report.checks_by_bound.entry(name.clone()).or_default() += 1;
            if check.saturated {
                *report.saturated_by_bound.entry(name.clone()).or_default() += 1;
            }
            report
                .histograms
                .entry(name.clone())
                .or_insert_with(|| Histogram::new(tol.tau_check))
                .add(check.margin);
            let tighter = report.tightest.get(&name).is_none_or(|t| check.margin < t.check.margin);
            if tighter {
                report.tightest.insert(
                    name,
                    TightestInstance {
                        index,
                        n_a,
                        check: check.clone(),
                    },
                );
            }
            if !check.holds {
                report.violations.push(Violation { index, n_a, check });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_gaussian_audit_passes() {
        let report = run_random_audit(&AuditSpec::gaussian(3, 50, 7)).unwrap();
        assert!(report.passed());
        assert!(report.checks_by_bound.contains_key("en_qcs_bound"));
        let hist = &report.histograms["en_qcs_bound"];
        assert_eq!(hist.counts.iter().sum::<usize>(), report.checks_by_bound["en_qcs_bound"]);
    }

    #[test]
    fn deterministic() {
        let spec = AuditSpec::fock(vec![4, 4], 20, 11);
        assert_eq!(run_random_audit(&spec).unwrap(), run_random_audit(&spec).unwrap());
    }

    #[test]
    fn rejects_large_fock() {
        assert!(run_random_audit(&AuditSpec::fock(vec![13, 2], 1, 0)).is_err());
    }
}
