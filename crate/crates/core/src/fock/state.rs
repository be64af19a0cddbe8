use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{decode, encode, inner, lower, strides, SCHMIDT_FLOOR, TAU_TRUNC};
use crate::error::{Error, Result};
use crate::symplectic::Bipartition;

/// Pure state on a truncated multimode Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockPureState {
    cutoffs: Vec<usize>,
    amps: Vec<Complex64>,
    tail_tolerance: f64,
}

/// First and second moments of a Fock-space state in the quadrature basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl FockPureState {
    /// Wraps truncated amplitudes; `‖amps‖²` may fall short of one by the
    /// truncated weight but may not exceed it.
    pub fn from_amplitudes(cutoffs: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.contains(&0) {
            return Err(Error::param("cutoffs", "need at least one mode and every cutoff >= 1"));
        }
        let dim: usize = cutoffs.iter().product();
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amps", "amplitudes must be finite"));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm2 > 1.0 + 1e-12 {
            return Err(Error::param("amps", format!("squared norm {norm2} exceeds 1")));
        }
        if norm2 == 0.0 {
            return Err(Error::param("amps", "state has zero norm"));
        }
        Ok(Self {
            cutoffs,
            amps,
            tail_tolerance: TAU_TRUNC,
        })
    }

    pub fn vacuum(cutoffs: Vec<usize>) -> Result<Self> {
        Self::number_state(&vec![0; cutoffs.len()], cutoffs)
    }

    /// `|k_1, ..., k_n>`.
    pub fn number_state(photons: &[usize], cutoffs: Vec<usize>) -> Result<Self> {
        if photons.len() != cutoffs.len() {
            return Err(Error::DimensionMismatch {
                expected: cutoffs.len(),
                found: photons.len(),
            });
        }
        if let Some((k, _)) = photons.iter().zip(&cutoffs).find(|(k, d)| **k >= **d) {
            return Err(Error::param("cutoffs", format!("cutoff must exceed photon number {k}")));
        }
        let dim: usize = cutoffs.iter().product();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[encode(photons, &strides(&cutoffs))] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(cutoffs, amps)
    }

    /// Number state with the smallest cutoffs that hold it.
    pub fn fock(photons: &[usize]) -> Result<Self> {
        Self::number_state(photons, photons.iter().map(|k| k + 1).collect())
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, photons: &[usize]) -> Complex64 {
        if photons.len() != self.modes() || photons.iter().zip(&self.cutoffs).any(|(k, d)| k >= d) {
            return Complex64::new(0.0, 0.0);
        }
        self.amps[encode(photons, &strides(&self.cutoffs))]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Weight discarded by truncation, `1 − ‖amps‖²` (clamped at zero).
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn check_truncation(&self) -> Result<()> {
        let tail = self.tail_mass();
        if tail > self.tail_tolerance {
            return Err(Error::Truncation {
                tail_mass: tail,
                tolerance: self.tail_tolerance,
                needed_cutoff: None,
            });
        }
        Ok(())
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            cutoffs: self.cutoffs.clone(),
            amps: self.amps.iter().map(|a| a / n).collect(),
            tail_tolerance: self.tail_tolerance,
        }
    }

    pub(crate) fn from_parts_unchecked(cutoffs: Vec<usize>, amps: Vec<Complex64>, tail_tolerance: f64) -> Self {
        Self {
            cutoffs,
            amps,
            tail_tolerance,
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        Self {
            cutoffs,
            amps,
            tail_tolerance: self.tail_tolerance.max(other.tail_tolerance),
        }
    }

    /// Reorders modes: mode `order[k]` of `self` becomes mode `k`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let n = self.modes();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&m| m >= n || std::mem::replace(&mut seen[m], true)) {
            return Err(Error::param("order", "must be a permutation of the modes"));
        }
        let new_cut: Vec<usize> = order.iter().map(|&m| self.cutoffs[m]).collect();
        let new_strides = strides(&new_cut);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (flat, a) in self.amps.iter().enumerate() {
            let old = decode(flat, &self.cutoffs);
            let new: Vec<usize> = order.iter().map(|&m| old[m]).collect();
            amps[encode(&new, &new_strides)] = *a;
        }
        Ok(Self {
            cutoffs: new_cut,
            amps,
            tail_tolerance: self.tail_tolerance,
        })
    }

    /// Amplitudes reshaped into a `dim_A x dim_B` matrix.
    pub fn bipartite_matrix(&self, bp: &Bipartition) -> Result<DMatrix<Complex64>> {
        bp.check_modes(self.modes())?;
        let order: Vec<usize> = bp.a_modes().iter().chain(bp.b_modes()).copied().collect();
        let p = self.permute_modes(&order)?;
        let dim_a: usize = p.cutoffs[..bp.n_a()].iter().product();
        let dim_b: usize = p.cutoffs[bp.n_a()..].iter().product();
        Ok(DMatrix::from_row_slice(dim_a, dim_b, &p.amps))
    }

    pub fn mean_photon_numbers(&self) -> Vec<f64> {
        let n2 = self.norm_sqr();
        (0..self.modes())
            .map(|k| {
                let l = lower(&self.amps, &self.cutoffs, k);
                inner(&l, &l).re / n2
            })
            .collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.mean_photon_numbers().iter().sum()
    }

    /// Quadrature mean vector and covariance matrix of the renormalised state.
    pub fn moments(&self) -> FockMoments {
        let n = self.modes();
        let n2 = self.norm_sqr();
        let lowered: Vec<Vec<Complex64>> = (0..n).map(|k| lower(&self.amps, &self.cutoffs, k)).collect();
        let alpha: Vec<Complex64> = lowered.iter().map(|l| inner(&self.amps, l) / n2).collect();
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let m = inner(&lowered[i], &lowered[j]) / n2 - alpha[i].conj() * alpha[j];
                let ll = lower(&lowered[j], &self.cutoffs, i);
                let l = inner(&self.amps, &ll) / n2 - alpha[i] * alpha[j];
                let delta = if i == j { 1.0 } else { 0.0 };
                cov[(2 * i, 2 * j)] = 2.0 * (l.re + m.re) + delta;
                cov[(2 * i + 1, 2 * j + 1)] = 2.0 * (m.re - l.re) + delta;
                cov[(2 * i, 2 * j + 1)] = 2.0 * (l.im + m.im);
                cov[(2 * i + 1, 2 * j)] = 2.0 * (l.im - m.im);
            }
        }
        let sq2 = std::f64::consts::SQRT_2;
        let mean = DVector::from_iterator(2 * n, alpha.iter().flat_map(|a| [sq2 * a.re, sq2 * a.im]));
        FockMoments { mean, cov }
    }

    pub fn to_json(&self) -> FockStateJson {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(flat, a)| (decode(flat, &self.cutoffs), a.re, a.im))
            .collect();
        FockStateJson {
            n: self.modes(),
            cutoffs: self.cutoffs.clone(),
            amps,
        }
    }

    pub fn from_json(json: &FockStateJson) -> Result<Self> {
        if json.n == 0 {
            return Err(Error::schema("n", "must be at least 1"));
        }
        if json.cutoffs.len() != json.n {
            return Err(Error::schema(
                "cutoffs",
                format!("expected {} entries, found {}", json.n, json.cutoffs.len()),
            ));
        }
        if json.cutoffs.contains(&0) {
            return Err(Error::schema("cutoffs", "every cutoff must be >= 1"));
        }
        let dim: usize = json.cutoffs.iter().product();
        let st = strides(&json.cutoffs);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (k, (idx, re, im)) in json.amps.iter().enumerate() {
            if idx.len() != json.n || idx.iter().zip(&json.cutoffs).any(|(i, d)| i >= d) {
                return Err(Error::schema(format!("amps[{k}]"), format!("index {idx:?} outside cutoffs")));
            }
            amps[encode(idx, &st)] += Complex64::new(*re, *im);
        }
        Self::from_amplitudes(json.cutoffs.clone(), amps).map_err(|e| Error::schema("amps", e.to_string()))
    }
}

/// On-disk form: `{"n": int, "cutoffs": [ints], "amps": [[[i1, ..., in], re, im], ...]}`.
/// Only nonzero amplitudes are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockStateJson {
    pub n: usize,
    pub cutoffs: Vec<usize>,
    pub amps: Vec<(Vec<usize>, f64, f64)>,
}

/// `Σ_j ΔR_j²` over all `2n` quadratures.
pub fn total_noise(psi: &FockPureState) -> Result<f64> {
    psi.check_truncation()?;
    let n2 = psi.norm_sqr();
    let mut total = 0.0;
    for k in 0..psi.modes() {
        let l = lower(&psi.amps, &psi.cutoffs, k);
        let photons = inner(&l, &l).re / n2;
        let alpha = inner(&psi.amps, &l) / n2;
        total += 2.0 * (photons - alpha.norm_sqr()) + 1.0;
    }
    Ok(total)
}

/// `M_TN(ψ) = N_tot(ψ)/n`, i.e. `(2<N̂> + n)/n` after centering.
pub fn mtn_pure(psi: &FockPureState) -> Result<f64> {
    Ok(total_noise(psi)? / psi.modes() as f64)
}

/// Schmidt coefficients (normalised, descending), below-floor values dropped.
pub fn schmidt_coefficients(psi: &FockPureState, bp: &Bipartition) -> Result<Vec<f64>> {
    psi.check_truncation()?;
    let m = psi.bipartite_matrix(bp)?;
    let norm = psi.norm_sqr().sqrt();
    let mut sv: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|s| s / norm)
        .filter(|&s| s > SCHMIDT_FLOOR)
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Von Neumann entropy of the reduced state, in nats.
pub fn entanglement_entropy(psi: &FockPureState, bp: &Bipartition) -> Result<f64> {
    let sv = schmidt_coefficients(psi, bp)?;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    Ok(sv
        .iter()
        .map(|s| s * s / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// `2 ln Σ_k σ_k`.
pub fn log_negativity_pure(psi: &FockPureState, bp: &Bipartition) -> Result<f64> {
    let sv = schmidt_coefficients(psi, bp)?;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let sum: f64 = sv.iter().sum::<f64>() / total.sqrt();
    Ok((2.0 * sum.ln()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn number_state_noise() {
        let vac = FockPureState::fock(&[0]).unwrap();
        assert_relative_eq!(total_noise(&vac).unwrap(), 1.0, epsilon = 1e-14);
        let psi = FockPureState::fock(&[5, 0]).unwrap();
        assert_relative_eq!(total_noise(&psi).unwrap(), 12.0, epsilon = 1e-12);
        assert_relative_eq!(mtn_pure(&psi).unwrap(), 6.0, epsilon = 1e-12);
        let nn = FockPureState::fock(&[3, 3]).unwrap();
        assert_relative_eq!(mtn_pure(&nn).unwrap(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let psi = FockPureState::fock(&[2, 1]).unwrap();
        let bp = Bipartition::new(1, 1).unwrap();
        assert_eq!(entanglement_entropy(&psi, &bp).unwrap(), 0.0);
        assert_eq!(log_negativity_pure(&psi, &bp).unwrap(), 0.0);
    }

    #[test]
    fn truncation_is_enforced() {
        let amps = vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
        let psi = FockPureState::from_amplitudes(vec![2], amps).unwrap();
        assert!(matches!(total_noise(&psi), Err(Error::Truncation { .. })));
        assert!(total_noise(&psi.clone().with_tail_tolerance(0.6)).is_ok());
        let too_big = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
        assert!(FockPureState::from_amplitudes(vec![2], too_big).is_err());
    }

    #[test]
    fn permute_and_json_roundtrip() {
        let amps: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64, -(k as f64) * 0.5)).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = FockPureState::from_amplitudes(vec![2, 3], amps.iter().map(|a| a / norm).collect()).unwrap();
        let swapped = psi.permute_modes(&[1, 0]).unwrap();
        assert_eq!(swapped.cutoffs(), &[3, 2]);
        assert_eq!(swapped.amplitude(&[2, 1]), psi.amplitude(&[1, 2]));
        let back = FockPureState::from_json(&psi.to_json()).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn json_schema_errors() {
        let bad = FockStateJson {
            n: 2,
            cutoffs: vec![2],
            amps: vec![],
        };
        assert!(matches!(FockPureState::from_json(&bad), Err(Error::Schema { field, .. }) if field == "cutoffs"));
        let bad = FockStateJson {
            n: 1,
            cutoffs: vec![2],
            amps: vec![(vec![5], 1.0, 0.0)],
        };
        assert!(matches!(FockPureState::from_json(&bad), Err(Error::Schema { field, .. }) if field == "amps[0]"));
    }

    #[test]
    fn vacuum_moments() {
        let m = FockPureState::vacuum(vec![3, 3]).unwrap().moments();
        assert!((m.cov - DMatrix::identity(4, 4)).amax() < 1e-14);
        assert!(m.mean.amax() < 1e-14);
    }
}
