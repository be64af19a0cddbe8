use serde::{Deserialize, Serialize};

use super::g;
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

const MAX_ITERATIONS: usize = 200;

/// How an optimal split was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NaStarMethod {
    Bisection,
    Asymptotic,
    AsymptoticRefined,
}

/// Photon number `N_A*` on the smaller party that balances
/// `n_A g(N_A/n_A) = n_B g((N − N_A)/n_B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NAStarSolution {
    #[serde(rename = "N")]
    pub total: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub n_a_star: f64,
    /// `|h(N_A*)|`, the imbalance between the two sides.
    pub residual: f64,
    pub method: NaStarMethod,
}

impl NAStarSolution {
    pub fn n_b_star(&self) -> f64 {
        self.total - self.n_a_star
    }

    /// `ν* = N_A*/n_A`.
    pub fn nu_star(&self) -> f64 {
        self.n_a_star / self.n_a as f64
    }

    /// `F(N) = n_A g(N_A*/n_A)`.
    pub fn value(&self) -> Result<f64> {
        Ok(self.n_a as f64 * g(self.nu_star().max(0.0))?)
    }
}

fn check_inputs(total: f64, n_a: usize, n_b: usize) -> Result<()> {
    if !(total >= 0.0) || !total.is_finite() {
        return Err(Error::param("N", format!("must be finite and >= 0, got {total}")));
    }
    if n_a == 0 || n_b == 0 {
        return Err(Error::param("bipartition", "both parties need at least one mode"));
    }
    if n_a > n_b {
        return Err(Error::param("bipartition", format!("expected n_A <= n_B, got {n_a} > {n_b}")));
    }
    Ok(())
}

fn imbalance(x: f64, total: f64, n_a: usize, n_b: usize) -> f64 {
    let (a, b) = (n_a as f64, n_b as f64);
    let ga = g((x / a).max(0.0)).unwrap_or(f64::NAN);
    let gb = g(((total - x) / b).max(0.0)).unwrap_or(f64::NAN);
    a * ga - b * gb
}

/// Bisection on the increasing imbalance over `[0, N]`.
pub fn solve_na_star(total: f64, n_a: usize, n_b: usize) -> Result<NAStarSolution> {
    check_inputs(total, n_a, n_b)?;
    let done = |x: f64, residual: f64| NAStarSolution {
        total,
        n_a,
        n_b,
        n_a_star: x,
        residual,
        method: NaStarMethod::Bisection,
    };
    if total == 0.0 {
        return Ok(done(0.0, 0.0));
    }
    if n_a == n_b {
        return Ok(done(total / 2.0, 0.0));
    }
    let (mut lo, mut hi) = (0.0, total);
    let (h_lo, h_hi) = (imbalance(lo, total, n_a, n_b), imbalance(hi, total, n_a, n_b));
    if !(h_lo < 0.0 && h_hi > 0.0) {
        return Err(Error::BracketFailure { lo: h_lo, hi: h_hi });
    }
    let tol = 1e-12 * total.max(1.0);
    let mut best = (f64::INFINITY, total / 2.0);
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let h = imbalance(mid, total, n_a, n_b);
        if h.abs() < best.0 {
            best = (h.abs(), mid);
        }
        if h == 0.0 || h.abs() <= tol * 1e-3 || hi - lo <= f64::EPSILON * total {
            break;
        }
        if h < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(best.1, best.0))
}

/// Leading-order `δ` in `N_A* ≈ (1 − δ) N`, with `μ = n_A/n_B`, `ν = N/n_A`.
pub fn delta_asymptotic(mu: f64, nu: f64) -> f64 {
    let t = (std::f64::consts::E * nu).powf(mu - 1.0);
    t / (mu * (1.0 + t))
}

/// `δ` including the first correction factor `1 − e^{1−μ}/(2ν^μ)`.
pub fn delta_asymptotic_refined(mu: f64, nu: f64) -> f64 {
    let e = std::f64::consts::E;
    let corr = 1.0 - (1.0 - mu).exp() / (2.0 * nu.powf(mu));
    corr / (mu * ((e * nu).powf(1.0 - mu) + 1.0))
}

/// Which closed-form approximation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoticVariant {
    Leading,
    Refined,
}

/// Closed-form `N_A* ≈ (1 − δ) N`; accurate for `ν = N/n_A ≫ 1`.
///
/// The symmetric split returns `N/2` for both variants; the refined
/// correction factor is not meaningful there.
pub fn na_star_asymptotic(total: f64, n_a: usize, n_b: usize, variant: AsymptoticVariant) -> Result<NAStarSolution> {
    let nu = total / n_a.max(1) as f64;
    if n_a != n_b && total > 0.0 && nu < 10.0 {
        log::warn!("asymptotic N_A* evaluated at nu = {nu:.3} < 10");
    }
    na_star_asymptotic_quiet(total, n_a, n_b, variant)
}

/// As [`na_star_asymptotic`], without the small-`ν` warning; figure sweeps
/// cover that regime on purpose.
pub(crate) fn na_star_asymptotic_quiet(
    total: f64,
    n_a: usize,
    n_b: usize,
    variant: AsymptoticVariant,
) -> Result<NAStarSolution> {
    check_inputs(total, n_a, n_b)?;
    let method = match variant {
        AsymptoticVariant::Leading => NaStarMethod::Asymptotic,
        AsymptoticVariant::Refined => NaStarMethod::AsymptoticRefined,
    };
    let nu = total / n_a as f64;
    let mu = n_a as f64 / n_b as f64;
    let n_a_star = if total == 0.0 {
        0.0
    } else if n_a == n_b {
        total / 2.0
    } else {
        let delta = match variant {
            AsymptoticVariant::Leading => delta_asymptotic(mu, nu),
            AsymptoticVariant::Refined => delta_asymptotic_refined(mu, nu),
        };
        ((1.0 - delta) * total).clamp(0.0, total)
    };
    Ok(NAStarSolution {
        total,
        n_a,
        n_b,
        n_a_star,
        residual: imbalance(n_a_star, total, n_a, n_b).abs(),
        method,
    })
}

/// A method for computing `N_A*`.
pub trait NaStarSolver: Named + Send + Sync {
    fn solve(&self, total: f64, n_a: usize, n_b: usize) -> Result<NAStarSolution>;
}

pub struct BisectionSolver;

pub struct AsymptoticSolver(pub AsymptoticVariant);

impl Named for BisectionSolver {
    fn name(&self) -> &'static str {
        "bisection"
    }
    fn description(&self) -> &'static str {
        "bisection on the balance equation"
    }
}

impl NaStarSolver for BisectionSolver {
    fn solve(&self, total: f64, n_a: usize, n_b: usize) -> Result<NAStarSolution> {
        solve_na_star(total, n_a, n_b)
    }
}

impl Named for AsymptoticSolver {
    fn name(&self) -> &'static str {
        match self.0 {
            AsymptoticVariant::Leading => "asymptotic",
            AsymptoticVariant::Refined => "asymptotic-refined",
        }
    }
    fn description(&self) -> &'static str {
        match self.0 {
            AsymptoticVariant::Leading => "leading-order closed form",
            AsymptoticVariant::Refined => "closed form with first-order correction",
        }
    }
}

impl NaStarSolver for AsymptoticSolver {
    fn solve(&self, total: f64, n_a: usize, n_b: usize) -> Result<NAStarSolution> {
        na_star_asymptotic(total, n_a, n_b, self.0)
    }
}

pub fn na_star_solvers() -> Registry<dyn NaStarSolver> {
    let mut reg: Registry<dyn NaStarSolver> = Registry::new("N_A* solver");
    let entries: [Box<dyn NaStarSolver>; 3] = [
        Box::new(BisectionSolver),
        Box::new(AsymptoticSolver(AsymptoticVariant::Leading)),
        Box::new(AsymptoticSolver(AsymptoticVariant::Refined)),
    ];
    for e in entries {
        reg.register(e).expect("built-in names are unique");
    }
    reg
}
