use serde::{Deserialize, Serialize};

use super::{Cell, Table};
use crate::bounds::{entanglement_check, gaussian_pure_check, BoundCheck};
use crate::error::{Error, Result};
use crate::fock::{appendix_c_state, entanglement_entropy, mtn_pure};
use crate::symplectic::Bipartition;

const TAIL_TARGET: f64 = 1e-16;

/// A non-Gaussian pure state that violates the pure-Gaussian bound: a
/// local, non-number-preserving permutation on B lowers the total noise of
/// `ψ_q` without changing its entanglement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixCReport {
    pub q: f64,
    pub k: usize,
    pub cutoff: usize,
    pub mean_photons_q: f64,
    pub mean_photons_prime: f64,
    pub mtn_q: f64,
    pub mtn_prime: f64,
    pub ef: f64,
    pub gaussian_bound: BoundCheck,
    pub optimal_split_bound: BoundCheck,
    pub gaussian_bound_violated: bool,
    pub optimal_split_bound_holds: bool,
}

impl AppendixCReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["quantity", "value"]);
        let rows: [(&str, Cell); 11] = [
            ("q", self.q.into()),
            ("k", self.k.into()),
            ("cutoff", self.cutoff.into()),
            ("mean_photons_q", self.mean_photons_q.into()),
            ("mean_photons_prime", self.mean_photons_prime.into()),
            ("mtn_q", self.mtn_q.into()),
            ("mtn_prime", self.mtn_prime.into()),
            ("ef [nats]", self.ef.into()),
            ("gaussian_bound [nats]", self.gaussian_bound.rhs.into()),
            ("optimal_split_bound [nats]", self.optimal_split_bound.rhs.into()),
            (
                "gaussian_bound_violated",
                Cell::Int(self.gaussian_bound_violated as i64),
            ),
        ];
        for (name, v) in rows {
            t.push(vec![name.into(), v]);
        }
        t.push(vec!["optimal_split_bound_holds".into(), Cell::Int(self.optimal_split_bound_holds as i64)]);
        t
    }
}

/// Builds `ψ_q` and `ψ′` and compares `E_F(ψ′)` with both bounds. The cutoff
/// leaves a tail of `1e-16`, well inside the truncation tolerance, because
/// the photon-number moments weigh the tail by `m`.
pub fn run_appendix_c_demo(q: f64, k: usize) -> Result<AppendixCReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", "must lie in (0, 1)"));
    }
    let cutoff = ((TAIL_TARGET.ln() / q.ln()).ceil() as usize + 1).max(k + 1);
    let (psi_q, psi_p) = appendix_c_state(q, k, cutoff)?;
    let bp = Bipartition::new(1, 2)?;
    let ef = entanglement_entropy(&psi_p, &bp)?;
    let mtn_prime = mtn_pure(&psi_p)?;
    let gaussian_bound = gaussian_pure_check(ef, mtn_prime, 1, 2)?;
    let optimal_split_bound = entanglement_check(ef, mtn_prime, 1, 2)?;
    Ok(AppendixCReport {
        q,
        k,
        cutoff,
        mean_photons_q: psi_q.mean_photon_number(),
        mean_photons_prime: psi_p.mean_photon_number(),
        mtn_q: mtn_pure(&psi_q)?,
        mtn_prime,
        ef,
        gaussian_bound_violated: !gaussian_bound.holds,
        optimal_split_bound_holds: optimal_split_bound.holds,
        gaussian_bound,
        optimal_split_bound,
    })
}
