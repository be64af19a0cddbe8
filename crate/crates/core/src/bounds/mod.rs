//! Entanglement and nonclassicality bounds, and pass/fail checks against them.
//!
//! Upper bounds on entanglement are expressed as functions of the mean total
//! noise `M_TN`; the Gaussian checks compare log-negativity with the
//! squared nonclassicality `C²`. Every check is reported as a [`BoundCheck`]
//! of the form `lhs ≤ rhs`.

mod nastar;

pub(crate) use nastar::na_star_asymptotic_quiet;

pub use nastar::{
    delta_asymptotic, delta_asymptotic_refined, na_star_asymptotic, na_star_solvers, solve_na_star,
    AsymptoticVariant, AsymptoticSolver, BisectionSolver, NAStarSolution, NaStarMethod, NaStarSolver,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

/// Bound violations smaller than this are attributed to rounding.
pub const TAU_CHECK: f64 = 1e-9;
/// Margins below this count as saturation.
pub const TAU_SAT: f64 = 1e-6;

/// `g(x) = (x+1) ln(x+1) − x ln x`, the entropy of a thermal state with mean
/// photon number `x`.
pub fn g(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::param("x", format!("g is defined for x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(x.ln_1p() + x * (1.0 / x).ln_1p())
}

/// Outcome of comparing the two sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub saturated: bool,
    pub provenance: String,
}

impl BoundCheck {
    pub fn new(lhs: f64, rhs: f64, provenance: impl Into<String>) -> Self {
        Self::with_tolerances(lhs, rhs, provenance, TAU_CHECK, TAU_SAT)
    }

    pub fn with_tolerances(lhs: f64, rhs: f64, provenance: impl Into<String>, tau_check: f64, tau_sat: f64) -> Self {
        let margin = rhs - lhs;
        let holds = margin >= -tau_check;
        Self {
            lhs,
            rhs,
            margin,
            holds,
            saturated: holds && margin.abs() <= tau_sat,
            provenance: provenance.into(),
        }
    }

    /// Same comparison re-judged under other tolerances.
    pub fn rejudged(&self, tau_check: f64, tau_sat: f64) -> Self {
        Self::with_tolerances(self.lhs, self.rhs, self.provenance.clone(), tau_check, tau_sat)
    }
}

fn check_mtn(mtn: f64) -> Result<()> {
    if !(mtn >= 1.0 - 1e-12) || !mtn.is_finite() {
        return Err(Error::param("mtn", format!("mean total noise must be finite and >= 1, got {mtn}")));
    }
    Ok(())
}

fn check_split(n_a: usize, n_b: usize) -> Result<()> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::param("bipartition", "both parties need at least one mode"));
    }
    Ok(())
}

/// `(n/2) g((M_TN − 1)/2)`.
pub fn theorem1_bound(mtn: f64, n: usize) -> Result<f64> {
    check_mtn(mtn)?;
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    Ok(0.5 * n as f64 * g(((mtn - 1.0) / 2.0).max(0.0))?)
}

/// Lower bound `1 + 2 exp((2/n) E_F − 2)` on `M_TN`, asserted only once
/// `E_F ≥ 3n/4`.
pub fn corollary1_lower_mtn(ef: f64, n: usize) -> Option<f64> {
    let nf = n as f64;
    if n == 0 || !(ef >= 1.5 * nf / 2.0) {
        return None;
    }
    Some(1.0 + 2.0 * (2.0 / nf * ef - 2.0).exp())
}

/// `F(N) = n_A g(N_A*/n_A)` with `N = (n/2)(M_TN − 1)`. The roles of A and B
/// are interchangeable, so the smaller party is used as A.
pub fn theorem1prime_bound(mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
    check_mtn(mtn)?;
    check_split(n_a, n_b)?;
    let (lo, hi) = (n_a.min(n_b), n_a.max(n_b));
    let total = 0.5 * (lo + hi) as f64 * (mtn - 1.0).max(0.0);
    let sol = solve_na_star(total, lo, hi)?;
    Ok(lo as f64 * g(sol.n_a_star / lo as f64)?)
}

/// Large-noise closed form `n_A ln((1−δ) N / n_A) + n_A`.
pub fn eofvsmtn_asymptotic(mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
    check_mtn(mtn)?;
    check_split(n_a, n_b)?;
    if mtn <= 1.0 {
        return Err(Error::param("mtn", "the asymptotic form diverges at mtn = 1"));
    }
    let (lo, hi) = (n_a.min(n_b), n_a.max(n_b));
    let total = 0.5 * (lo + hi) as f64 * (mtn - 1.0);
    let nu = total / lo as f64;
    if nu < 10.0 {
        log::warn!("asymptotic bound evaluated at nu = {nu:.3} < 10; it is only accurate for large noise");
    }
    let delta = delta_asymptotic(lo as f64 / hi as f64, nu);
    let la = lo as f64;
    Ok(la * ((1.0 - delta) * total / la).ln() + la)
}

/// `n_A g((n/(4 n_A))(M_TN − 1))`, the bound for pure Gaussian states
/// (`n_A` the smaller party).
pub fn gaussian_pure_bound(mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
    check_mtn(mtn)?;
    check_split(n_a, n_b)?;
    let lo = n_a.min(n_b) as f64;
    let n = (n_a + n_b) as f64;
    Ok(lo * g((n / (4.0 * lo) * (mtn - 1.0)).max(0.0))?)
}

/// `E_N ≤ n_−(ln C² + ln(n/n_−))`; with `n_− = 0` the state must have `E_N = 0`.
pub fn theorem2_bound(log_neg: f64, qcs2: f64, n: usize, n_minus: usize) -> Result<BoundCheck> {
    if !(qcs2 > 0.0) {
        return Err(Error::param("qcs2", "must be positive"));
    }
    if n_minus > n {
        return Err(Error::param("n_minus", "cannot exceed the number of modes"));
    }
    if n_minus == 0 {
        return Ok(BoundCheck::new(log_neg, 0.0, "en_zero_without_negative_eigenvalues"));
    }
    let k = n_minus as f64;
    let rhs = k * (qcs2.ln() + (n as f64 / k).ln());
    Ok(BoundCheck::new(log_neg, rhs, "en_qcs_bound"))
}

/// Two-mode refinement `C² ≥ ½(e^{E_N} + e^{−E_N}/√det V)`, for entangled
/// two-mode states only.
pub fn theorem2_twomode_refined(qcs2: f64, log_neg: f64, det_v: f64) -> Result<BoundCheck> {
    if !(log_neg > 0.0) {
        return Err(Error::param("log_negativity", "refined bound applies only to entangled states"));
    }
    if !(det_v > 0.0) {
        return Err(Error::param("det_v", "must be positive"));
    }
    let lhs = 0.5 * (log_neg.exp() + (-log_neg).exp() / det_v.sqrt());
    Ok(BoundCheck::new(lhs, qcs2, "en_qcs_two_mode_refined"))
}

/// Both implications that follow from the log-negativity bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Report {
    /// `ln C² ≥ E_N/n − 1/e`, asserted when `E_N > n/e`.
    pub exponential_growth: Option<BoundCheck>,
    /// `E_N = 0`, asserted when `C² < e^{−n/e}`.
    pub separability: Option<BoundCheck>,
}

impl Corollary2Report {
    pub fn holds(&self) -> bool {
        self.exponential_growth.iter().chain(&self.separability).all(|c| c.holds)
    }
}

pub fn corollary2_checks(qcs2: f64, log_neg: f64, n: usize) -> Result<Corollary2Report> {
    if !(qcs2 > 0.0) || n == 0 {
        return Err(Error::param("qcs2", "must be positive with n >= 1"));
    }
    let nf = n as f64;
    let e = std::f64::consts::E;
    let exponential_growth = (log_neg > nf / e)
        .then(|| BoundCheck::new(log_neg / nf - 1.0 / e, qcs2.ln(), "qcs_exponential_growth"));
    let separability = (qcs2 < (-nf / e).exp()).then(|| BoundCheck::new(log_neg, 0.0, "qcs_separability_threshold"));
    Ok(Corollary2Report {
        exponential_growth,
        separability,
    })
}

/// `E_F ≤ (n/2) g((M_TN − 1)/2)`; valid for every split.
pub fn total_noise_check(ef: f64, mtn: f64, n: usize) -> Result<BoundCheck> {
    Ok(BoundCheck::new(ef, theorem1_bound(mtn, n)?, "ef_mtn_total_noise"))
}

/// `E_F ≤ F(N)` with the optimal photon split between the parties.
pub fn entanglement_check(ef: f64, mtn: f64, n_a: usize, n_b: usize) -> Result<BoundCheck> {
    Ok(BoundCheck::new(ef, theorem1prime_bound(mtn, n_a, n_b)?, "ef_mtn_optimal_split"))
}

/// `E_F ≤ n_A g((n/(4 n_A))(M_TN − 1))`; only claimed for pure Gaussian states.
pub fn gaussian_pure_check(ef: f64, mtn: f64, n_a: usize, n_b: usize) -> Result<BoundCheck> {
    Ok(BoundCheck::new(ef, gaussian_pure_bound(mtn, n_a, n_b)?, "ef_mtn_gaussian_pure"))
}

/// `M_TN ≥ 1 + 2 exp((2/n) E_F − 2)` when asserted.
pub fn corollary1_check(ef: f64, mtn: f64, n: usize) -> Option<BoundCheck> {
    corollary1_lower_mtn(ef, n).map(|lower| BoundCheck::new(lower, mtn, "mtn_exponential_lower"))
}

/// An upper bound on entanglement of formation as a function of `M_TN`.
pub trait EntanglementBound: Named + Send + Sync {
    fn bound(&self, mtn: f64, n_a: usize, n_b: usize) -> Result<f64>;

    /// Whether the bound holds for every pure state, not only a restricted
    /// class or asymptotically.
    fn universal(&self) -> bool {
        true
    }
}

pub struct SymmetricBound;
pub struct AsymmetricBound;
pub struct GaussianPureBound;
pub struct AsymptoticBound;

impl Named for SymmetricBound {
    fn name(&self) -> &'static str {
        "symmetric"
    }
    fn description(&self) -> &'static str {
        "(n/2) g((M_TN-1)/2)"
    }
}

impl EntanglementBound for SymmetricBound {
    fn bound(&self, mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
        check_split(n_a, n_b)?;
        theorem1_bound(mtn, n_a + n_b)
    }
}

impl Named for AsymmetricBound {
    fn name(&self) -> &'static str {
        "asymmetric"
    }
    fn description(&self) -> &'static str {
        "n_A g(N_A*/n_A) with N_A* from bisection"
    }
}

impl EntanglementBound for AsymmetricBound {
    fn bound(&self, mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
        theorem1prime_bound(mtn, n_a, n_b)
    }
}

impl Named for GaussianPureBound {
    fn name(&self) -> &'static str {
        "gaussian-pure"
    }
    fn description(&self) -> &'static str {
        "n_A g(n (M_TN-1) / (4 n_A)), pure Gaussian states only"
    }
}

impl EntanglementBound for GaussianPureBound {
    fn bound(&self, mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
        gaussian_pure_bound(mtn, n_a, n_b)
    }

    fn universal(&self) -> bool {
        false
    }
}

impl Named for AsymptoticBound {
    fn name(&self) -> &'static str {
        "asymptotic"
    }
    fn description(&self) -> &'static str {
        "large-noise closed form n_A ln((1-delta) N / n_A) + n_A"
    }
}

impl EntanglementBound for AsymptoticBound {
    fn bound(&self, mtn: f64, n_a: usize, n_b: usize) -> Result<f64> {
        eofvsmtn_asymptotic(mtn, n_a, n_b)
    }

    fn universal(&self) -> bool {
        false
    }
}

pub fn entanglement_bounds() -> Registry<dyn EntanglementBound> {
    let mut reg: Registry<dyn EntanglementBound> = Registry::new("entanglement bound");
    let entries: [Box<dyn EntanglementBound>; 4] = [
        Box::new(SymmetricBound),
        Box::new(AsymmetricBound),
        Box::new(GaussianPureBound),
        Box::new(AsymptoticBound),
    ];
    for e in entries {
        reg.register(e).expect("built-in names are unique");
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert_relative_eq!(g(1.0).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(g(0.8f64.sinh().powi(2)).unwrap(), 1.227349081672534, epsilon = 1e-14);
        assert!(g(-0.1).is_err());
        assert!(g(f64::NAN).is_err());
        let big = 1e12;
        assert_relative_eq!(g(big).unwrap(), big.ln() + 1.0, epsilon = 1e-11);
    }

    #[test]
    fn symmetric_and_asymmetric_agree() {
        for mtn in [1.0, 1.5, 3.0, 40.0] {
            let a = theorem1_bound(mtn, 4).unwrap();
            assert_relative_eq!(theorem1prime_bound(mtn, 2, 2).unwrap(), a, epsilon = 1e-12);
            assert_relative_eq!(gaussian_pure_bound(mtn, 2, 2).unwrap(), a, epsilon = 1e-12);
        }
        assert_eq!(theorem1_bound(1.0, 2).unwrap(), 0.0);
        let r: f64 = 0.7;
        assert_relative_eq!(
            theorem1_bound((2.0 * r).cosh(), 2).unwrap(),
            g(r.sinh().powi(2)).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn corollary1_threshold() {
        assert_relative_eq!(corollary1_lower_mtn(1.5, 2).unwrap(), 1.0 + 2.0 * (-0.5f64).exp(), epsilon = 1e-15);
        assert!(corollary1_lower_mtn(1.49, 2).is_none());
    }

    #[test]
    fn theorem2_tmsv() {
        for r in [0.0f64, 0.1, 0.5, 1.0, 2.0] {
            let en = 2.0 * r;
            let c2 = (2.0 * r).cosh();
            let nm = if r > 0.0 { 1 } else { 0 };
            assert!(theorem2_bound(en, c2, 2, nm).unwrap().holds);
        }
        let refined = theorem2_twomode_refined(1.0f64.cosh(), 1.0, 1.0).unwrap();
        assert!(refined.saturated);
        assert!(theorem2_twomode_refined(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn corollary2_guards() {
        let rep = corollary2_checks(1.0, 0.1, 2).unwrap();
        assert!(rep.exponential_growth.is_none() && rep.separability.is_none());
        let rep = corollary2_checks(0.3, 0.0, 2).unwrap();
        assert!(rep.separability.unwrap().holds);
        let rep = corollary2_checks(3f64.cosh(), 3.0, 2).unwrap();
        assert!(rep.exponential_growth.unwrap().holds);
    }

    #[test]
    fn bound_check_flags() {
        let c = BoundCheck::new(1.0, 1.0 - 5e-10, "x");
        assert!(c.holds && c.saturated);
        let c = BoundCheck::new(1.0, 0.9, "x");
        assert!(!c.holds && !c.saturated);
    }

    #[test]
    fn registry_lookup() {
        let reg = entanglement_bounds();
        assert_eq!(reg.names(), vec!["symmetric", "asymmetric", "gaussian-pure", "asymptotic"]);
        let b = reg.get("Gaussian-Pure").unwrap().bound(3.0, 1, 2).unwrap();
        assert_relative_eq!(b, gaussian_pure_bound(3.0, 1, 2).unwrap());
        assert!(reg.get("nope").is_err());
    }
}
