use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{decode, encode, lower, raise, strides, FockPureState, TAU_TRUNC};
use crate::error::{Error, Result};
use crate::symplectic::{TAU_PD, TAU_SYM};

/// Density operator on a truncated multimode Fock space, as a matrix over
/// the flattened basis (same ordering as [`FockPureState`]).
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityOperator {
    cutoffs: Vec<usize>,
    rho: DMatrix<Complex64>,
    tail_tolerance: f64,
}

impl FockDensityOperator {
    /// Validates Hermiticity, positivity and trace, then symmetrises.
    pub fn new(cutoffs: Vec<usize>, rho: DMatrix<Complex64>) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.contains(&0) {
            return Err(Error::param("cutoffs", "need at least one mode and every cutoff >= 1"));
        }
        let dim: usize = cutoffs.iter().product();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        let scale = rho.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        if !deviation.is_finite() || deviation > TAU_SYM {
            return Err(Error::AsymmetricInput { deviation });
        }
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let out = Self {
            cutoffs,
            rho,
            tail_tolerance: TAU_TRUNC,
        };
        let min_eig = out.rho.clone().symmetric_eigenvalues().min();
        if min_eig < -TAU_PD {
            return Err(Error::NonPositiveDefinite { min_eigenvalue: min_eig });
        }
        let tr = out.trace();
        if tr > 1.0 + TAU_PD || tr <= 0.0 {
            return Err(Error::param("rho", format!("trace {tr} outside (0, 1]")));
        }
        Ok(out)
    }

    pub fn from_pure(psi: &FockPureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Self {
            cutoffs: psi.cutoffs().to_vec(),
            rho: &v * v.adjoint(),
            tail_tolerance: psi.tail_tolerance(),
        }
    }

    /// `Σ_k w_k |ψ_k><ψ_k|`; weights must be non-negative and sum to at most one.
    pub fn from_ensemble(ensemble: &[(f64, FockPureState)]) -> Result<Self> {
        let Some((_, first)) = ensemble.first() else {
            return Err(Error::param("ensemble", "must not be empty"));
        };
        let cutoffs = first.cutoffs().to_vec();
        let dim = first.amplitudes().len();
        let mut rho = DMatrix::zeros(dim, dim);
        let mut wsum = 0.0;
        for (w, psi) in ensemble {
            if !(*w >= 0.0) {
                return Err(Error::param("ensemble", "weights must be non-negative"));
            }
            if psi.cutoffs() != cutoffs.as_slice() {
                return Err(Error::param("ensemble", "all members must share cutoffs"));
            }
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            rho += &v * v.adjoint() * Complex64::new(*w, 0.0);
            wsum += w;
        }
        if wsum > 1.0 + 1e-12 {
            return Err(Error::param("ensemble", format!("weights sum to {wsum} > 1")));
        }
        Ok(Self {
            cutoffs,
            rho,
            tail_tolerance: TAU_TRUNC,
        })
    }

    /// Product of thermal states truncated at the given cutoffs.
    pub fn thermal(mean_photons: &[f64], cutoffs: Vec<usize>) -> Result<Self> {
        if mean_photons.len() != cutoffs.len() {
            return Err(Error::DimensionMismatch {
                expected: cutoffs.len(),
                found: mean_photons.len(),
            });
        }
        if mean_photons.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::param("mean_photons", "must be finite and non-negative"));
        }
        let dim: usize = cutoffs.iter().product();
        let mut rho = DMatrix::zeros(dim, dim);
        for flat in 0..dim {
            let idx = decode(flat, &cutoffs);
            let p: f64 = idx
                .iter()
                .zip(mean_photons)
                .map(|(&k, &m)| {
                    let q = m / (1.0 + m);
                    q.powi(k as i32) / (1.0 + m)
                })
                .product();
            rho[(flat, flat)] = Complex64::new(p, 0.0);
        }
        Ok(Self {
            cutoffs,
            rho,
            tail_tolerance: TAU_TRUNC,
        })
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// `Tr ρ² / (Tr ρ)²`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() / (tr * tr)
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

    /// Reduced operator on `keep` (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.modes();
        for &m in keep {
            if m >= n {
                return Err(Error::ModeIndex { index: m, modes: n });
            }
        }
        let traced: Vec<usize> = (0..n).filter(|m| !keep.contains(m)).collect();
        if keep.len() + traced.len() != n || keep.is_empty() {
            return Err(Error::param("keep", "must be a non-empty list of distinct modes"));
        }
        let keep_cut: Vec<usize> = keep.iter().map(|&m| self.cutoffs[m]).collect();
        let trace_cut: Vec<usize> = traced.iter().map(|&m| self.cutoffs[m]).collect();
        let dk: usize = keep_cut.iter().product();
        let dt: usize = trace_cut.iter().product();
        let st = strides(&self.cutoffs);
        let old_index = |a: usize, t: usize| {
            let ia = decode(a, &keep_cut);
            let it = decode(t, &trace_cut);
            let mut full = vec![0; n];
            for (k, &m) in keep.iter().enumerate() {
                full[m] = ia[k];
            }
            for (k, &m) in traced.iter().enumerate() {
                full[m] = it[k];
            }
            encode(&full, &st)
        };
        let map: Vec<Vec<usize>> = (0..dk).map(|a| (0..dt).map(|t| old_index(a, t)).collect()).collect();
        let mut out = DMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                out[(a, b)] = (0..dt).map(|t| self.rho[(map[a][t], map[b][t])]).sum();
            }
        }
        Ok(Self {
            cutoffs: keep_cut,
            rho: out,
            tail_tolerance: self.tail_tolerance,
        })
    }

    /// Copy of the operator embedded in a larger box.
    pub fn padded(&self, extra: usize) -> Self {
        let new_cut: Vec<usize> = self.cutoffs.iter().map(|d| d + extra).collect();
        let st = strides(&new_cut);
        let map: Vec<usize> = (0..self.rho.nrows())
            .map(|flat| encode(&decode(flat, &self.cutoffs), &st))
            .collect();
        let dim: usize = new_cut.iter().product();
        let mut rho = DMatrix::zeros(dim, dim);
        for (i, &ni) in map.iter().enumerate() {
            for (j, &nj) in map.iter().enumerate() {
                rho[(ni, nj)] = self.rho[(i, j)];
            }
        }
        Self {
            cutoffs: new_cut,
            rho,
            tail_tolerance: self.tail_tolerance,
        }
    }
}

/// `C²(ρ) = Σ_j ‖[R_j, ρ]‖_F² / (2 n Tr ρ²)` over all `2n` quadratures.
///
/// The operator is first embedded one level higher on every mode so that the
/// quadratures act exactly on its support; only the trace deficit is checked
/// against the truncation tolerance.
pub fn qcs2_fock(rho: &FockDensityOperator) -> Result<f64> {
    rho.check_truncation()?;
    let n = rho.modes();
    let big = rho.padded(1);
    let dim = big.rho.nrows();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for mode in 0..n {
        let mut rx = DMatrix::zeros(dim, dim);
        let mut rp = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let col: Vec<Complex64> = big.rho.column(c).iter().copied().collect();
            let lo = lower(&col, &big.cutoffs, mode);
            let hi = raise(&col, &big.cutoffs, mode);
            for r in 0..dim {
                rx[(r, c)] = (lo[r] + hi[r]) * h;
                rp[(r, c)] = (lo[r] - hi[r]) * Complex64::new(0.0, -h);
            }
        }
        for y in [rx, rp] {
            total += (y.adjoint() - &y).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    let p = big.rho.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(total / (2.0 * n as f64 * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_and_single_photon() {
        let vac = FockDensityOperator::from_pure(&FockPureState::fock(&[0]).unwrap());
        assert_relative_eq!(qcs2_fock(&vac).unwrap(), 1.0, epsilon = 1e-14);
        let one = FockDensityOperator::from_pure(&FockPureState::fock(&[1]).unwrap());
        assert_relative_eq!(qcs2_fock(&one).unwrap(), 3.0, epsilon = 1e-13);
    }

    #[test]
    fn thermal_one_photon() {
        let rho = FockDensityOperator::thermal(&[1.0], vec![60]).unwrap();
        assert_relative_eq!(qcs2_fock(&rho).unwrap(), 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn heavy_tail_rejected() {
        let rho = FockDensityOperator::thermal(&[1.0], vec![5]).unwrap();
        assert!(matches!(qcs2_fock(&rho), Err(Error::Truncation { .. })));
    }

    #[test]
    fn partial_trace_of_product() {
        let psi = FockPureState::fock(&[1, 0]).unwrap().tensor(&FockPureState::fock(&[2]).unwrap());
        let rho = FockDensityOperator::from_pure(&psi);
        let red = rho.partial_trace(&[2, 0]).unwrap();
        assert_eq!(red.cutoffs(), &[3, 2]);
        assert_relative_eq!(red.matrix()[(2 * 2 + 1, 2 * 2 + 1)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(red.purity(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]);
        assert!(matches!(FockDensityOperator::new(vec![2], bad), Err(Error::AsymmetricInput { .. })));
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]));
        assert!(matches!(FockDensityOperator::new(vec![2], neg), Err(Error::NonPositiveDefinite { .. })));
    }
}
