//! Gaussian states: constructors, Gaussian unitaries, and closed-form
//! nonclassicality (QCS², F_tot) and entanglement (log-negativity) measures.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{
    check_physicality, partial_transpose, quadrature_indices, symplectic_eigenvalues,
    Bipartition, CovarianceMatrix, SymplecticForm, TAU_PHYS,
};

/// Mean vector plus covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: CovarianceMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        Ok(Self { mean, cov })
    }

    /// Centered state with the given covariance matrix.
    pub fn centered(cov: CovarianceMatrix) -> Self {
        Self {
            mean: DVector::zeros(cov.dim()),
            cov,
        }
    }

    pub fn modes(&self) -> usize {
        self.cov.modes()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    /// `P = 1/sqrt(det V)`.
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }

    pub fn is_pure(&self, tol: f64) -> Result<bool> {
        Ok(symplectic_eigenvalues(&self.cov)?
            .iter()
            .all(|nu| (nu - 1.0).abs() <= tol))
    }

    /// Phase-space translation of the mean.
    pub fn displaced(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cov.dim(),
                found: shift.len(),
            });
        }
        Ok(Self {
            mean: &self.mean + DVector::from_column_slice(shift),
            cov: self.cov.clone(),
        })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut mean = DVector::zeros(self.mean.len() + other.mean.len());
        mean.rows_mut(0, self.mean.len()).copy_from(&self.mean);
        mean.rows_mut(self.mean.len(), other.mean.len())
            .copy_from(&other.mean);
        Self {
            mean,
            cov: self.cov.direct_sum(&other.cov),
        }
    }

    /// `V -> S V S^T`, `r -> S r`.
    pub fn apply_symplectic(&self, s: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            cov: self.cov.conjugate(s)?,
            mean: s * &self.mean,
        })
    }

    pub fn apply_beam_splitter(&self, i: usize, j: usize) -> Result<Self> {
        let s = beam_splitter_symplectic(self.modes(), i, j)?;
        self.apply_symplectic(&s)
    }

    /// Reduced state on the listed modes (partial trace).
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        let idx = quadrature_indices(modes, self.modes())?;
        Ok(Self {
            mean: DVector::from_iterator(idx.len(), idx.iter().map(|&k| self.mean[k])),
            cov: self.cov.submatrix(modes)?,
        })
    }

    pub fn to_json(&self) -> GaussianStateJson {
        GaussianStateJson {
            n: self.modes(),
            mean: self.mean.iter().copied().collect(),
            cov: self.cov.to_rows(),
        }
    }

    pub fn from_json(json: &GaussianStateJson) -> Result<Self> {
        let dim = 2 * json.n;
        if json.n == 0 {
            return Err(Error::schema("n", "must be at least 1"));
        }
        if json.mean.len() != dim {
            return Err(Error::schema(
                "mean",
                format!("expected {dim} entries, found {}", json.mean.len()),
            ));
        }
        if json.cov.len() != dim {
            return Err(Error::schema(
                "cov",
                format!("expected {dim} rows, found {}", json.cov.len()),
            ));
        }
        if let Some((i, row)) = json.cov.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::schema(
                format!("cov[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        let cov = CovarianceMatrix::from_rows(&json.cov).map_err(|e| Error::schema("cov", e.to_string()))?;
        Self::new(DVector::from_vec(json.mean.clone()), cov)
    }
}

/// On-disk form: `{"n": int, "mean": [2n], "cov": [[2n x 2n]]}`, rows of
/// `cov` in interleaved `(X1, P1, ..., Xn, Pn)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianStateJson {
    pub n: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

pub fn make_vacuum(n: usize) -> GaussianState {
    GaussianState::centered(CovarianceMatrix::identity(n))
}

/// Product of thermal states, one mean photon number per mode.
pub fn make_thermal(mean_photons: &[f64]) -> Result<GaussianState> {
    if mean_photons.is_empty() {
        return Err(Error::param("n", "need at least one mode"));
    }
    if let Some(bad) = mean_photons.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::param("nbar", format!("must be finite and >= 0, got {bad}")));
    }
    let diag: Vec<f64> = mean_photons
        .iter()
        .flat_map(|&nb| [2.0 * nb + 1.0, 2.0 * nb + 1.0])
        .collect();
    Ok(GaussianState::centered(CovarianceMatrix::new(
        DMatrix::from_diagonal(&DVector::from_vec(diag)),
    )?))
}

/// Single-mode squeezed vacuum; `phi` is the angle of the anti-squeezed
/// axis measured from P, so `phi = 0` squeezes X and `phi = π/2` squeezes P.
pub fn make_squeezed(s: f64, phi: f64) -> Result<GaussianState> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    if !phi.is_finite() {
        return Err(Error::param("phi", "must be finite"));
    }
    let (c, sn) = (phi.cos(), phi.sin());
    let rot = DMatrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![(-2.0 * s).exp(), (2.0 * s).exp()]));
    Ok(GaussianState::centered(CovarianceMatrix::new(
        &rot * d * rot.transpose(),
    )?))
}

/// Two-mode squeezed vacuum: `V_A = V_B = cosh(2r) 1`, `C = sinh(2r) σ_z`.
pub fn make_tmsv(r: f64) -> Result<GaussianState> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::param("r", format!("must be finite and >= 0, got {r}")));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    Ok(GaussianState::centered(CovarianceMatrix::from_rows(&[
        vec![c, 0.0, s, 0.0],
        vec![0.0, c, 0.0, -s],
        vec![s, 0.0, c, 0.0],
        vec![0.0, -s, 0.0, c],
    ])?))
}

/// Coherent state `D(α)|0>` with `<X> = sqrt(2) Re α`, `<P> = sqrt(2) Im α`.
pub fn make_coherent(alpha: &[Complex64]) -> GaussianState {
    let mean: Vec<f64> = alpha
        .iter()
        .flat_map(|a| [std::f64::consts::SQRT_2 * a.re, std::f64::consts::SQRT_2 * a.im])
        .collect();
    GaussianState {
        mean: DVector::from_vec(mean),
        cov: CovarianceMatrix::identity(alpha.len()),
    }
}

/// Heisenberg-picture matrix of `exp(π/4 (a_i† a_j − a_i a_j†))`:
/// `a_i -> (a_i + a_j)/√2`, `a_j -> (a_j − a_i)/√2`.
pub fn beam_splitter_symplectic(modes: usize, i: usize, j: usize) -> Result<DMatrix<f64>> {
    for m in [i, j] {
        if m >= modes {
            return Err(Error::ModeIndex { index: m, modes });
        }
    }
    if i == j {
        return Err(Error::param("modes", "beam splitter needs two distinct modes"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = h;
        s[(a, b)] = h;
        s[(b, a)] = -h;
        s[(b, b)] = h;
    }
    Ok(s)
}

/// `C²(ρ_G) = Tr V⁻¹ / (2n)`.
pub fn qcs2_gaussian(st: &GaussianState) -> Result<f64> {
    let inv = st.cov.inverse()?;
    Ok(inv.trace() / (2.0 * st.modes() as f64))
}

/// Total quantum Fisher information `Tr V⁻¹ / (2n)`; equal to QCS² here.
pub fn ftot_gaussian(st: &GaussianState) -> Result<f64> {
    qcs2_gaussian(st)
}

/// QCS² through the characteristic function: `|χ|²` is a centered Gaussian
/// density with covariance `Σ = ½ (Ω V Ω^T)⁻¹ = ½ Ω V⁻¹ Ω^T`, and the ratio
/// `‖|ξ|χ‖² / (n ‖χ‖²)` is its second moment `Tr Σ / n`. Inverts through an
/// eigendecomposition of `Ω V Ω^T`, independent of [`qcs2_gaussian`].
pub fn qcs2_gaussian_char_oracle(st: &GaussianState) -> Result<f64> {
    let n = st.modes();
    let omega = SymplecticForm::new(n).matrix();
    let m = &omega * st.cov.matrix() * omega.transpose();
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.min();
    if min <= crate::symplectic::TAU_PD {
        return Err(Error::NonPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let q = &eig.eigenvectors;
    let sigma = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 0.5 / l)) * q.transpose();
    Ok(sigma.trace() / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogNegativity {
    pub value: f64,
    pub n_minus: usize,
    /// Symplectic spectrum of the partially transposed covariance matrix.
    pub spectrum: Vec<f64>,
}

/// `E_N = Σ_{ν̃ < 1} ln(1/ν̃)`; eigenvalues within `TAU_PHYS` of 1 do not count.
pub fn log_negativity_gaussian(st: &GaussianState, bp: &Bipartition) -> Result<LogNegativity> {
    let pt = partial_transpose(&st.cov, bp)?;
    let spectrum = symplectic_eigenvalues(&pt)?;
    let minus: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|&nu| nu < 1.0 - TAU_PHYS)
        .collect();
    Ok(LogNegativity {
        value: minus.iter().map(|nu| -nu.ln()).sum(),
        n_minus: minus.len(),
        spectrum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub qcs2: f64,
    pub ftot: f64,
    pub log_negativity: f64,
    pub n_minus: usize,
    pub spectrum: Vec<f64>,
    pub spectrum_pt: Vec<f64>,
    pub purity: f64,
}

pub fn measure_report(st: &GaussianState, bp: &Bipartition) -> Result<MeasureReport> {
    let en = log_negativity_gaussian(st, bp)?;
    Ok(MeasureReport {
        qcs2: qcs2_gaussian(st)?,
        ftot: ftot_gaussian(st)?,
        log_negativity: en.value,
        n_minus: en.n_minus,
        spectrum: symplectic_eigenvalues(&st.cov)?,
        spectrum_pt: en.spectrum,
        purity: st.purity(),
    })
}

/// Distribution of the Williamson eigenvalues of random states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PurityProfile {
    /// Every `ν_i = 1`.
    Pure,
    /// `ν_i = 1 + Exp(λ)`.
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomStateConfig {
    pub profile: PurityProfile,
    /// Single-mode squeezers are drawn uniformly from `[0, max_squeezing]`.
    pub max_squeezing: f64,
}

impl Default for RandomStateConfig {
    fn default() -> Self {
        Self {
            profile: PurityProfile::Exponential { lambda: 1.0 },
            max_squeezing: 1.0,
        }
    }
}

/// Haar-distributed `n x n` unitary (QR of a complex Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Orthogonal symplectic matrix of the passive transformation `a -> U a`.
pub fn passive_symplectic(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let z = u[(j, k)];
            s[(2 * j, 2 * k)] = z.re;
            s[(2 * j, 2 * k + 1)] = -z.im;
            s[(2 * j + 1, 2 * k)] = z.im;
            s[(2 * j + 1, 2 * k + 1)] = z.re;
        }
    }
    s
}

/// `O1 · ⊕ diag(e^{-r_k}, e^{r_k}) · O2` with Haar-random passive `O1`, `O2`.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, max_squeezing: f64, rng: &mut R) -> DMatrix<f64> {
    let o1 = passive_symplectic(&random_unitary(n, rng));
    let o2 = passive_symplectic(&random_unitary(n, rng));
    let diag: Vec<f64> = (0..n)
        .flat_map(|_| {
            let r = if max_squeezing > 0.0 { rng.random::<f64>() * max_squeezing } else { 0.0 };
            [(-r).exp(), r.exp()]
        })
        .collect();
    o1 * DMatrix::from_diagonal(&DVector::from_vec(diag)) * o2
}

pub fn random_gaussian_state_with<R: Rng + ?Sized>(
    n: usize,
    config: &RandomStateConfig,
    rng: &mut R,
) -> Result<GaussianState> {
    if n == 0 {
        return Err(Error::param("n", "need at least one mode"));
    }
    let nus: Vec<f64> = match config.profile {
        PurityProfile::Pure => vec![1.0; n],
        PurityProfile::Exponential { lambda } => {
            let exp = Exp::new(lambda).map_err(|e| Error::param("lambda", e.to_string()))?;
            (0..n).map(|_| 1.0 + exp.sample(rng).abs()).collect()
        }
    };
    let williamson = DMatrix::from_diagonal(&DVector::from_iterator(
        2 * n,
        nus.iter().flat_map(|&nu| [nu, nu]),
    ));
    let s = random_symplectic(n, config.max_squeezing, rng);
    let cov = CovarianceMatrix::new(&s * williamson * s.transpose())?;
    Ok(GaussianState::centered(cov))
}

/// Seeded random Gaussian state; identical seeds give bit-identical states.
pub fn random_gaussian_state(n: usize, seed: u64, config: &RandomStateConfig) -> Result<GaussianState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_gaussian_state_with(n, config, &mut rng)
}

/// `V = 1 + A A^T` with a random Gaussian `A` of scale `noise`: classical
/// (positive P-function) by construction.
pub fn random_classical_state<R: Rng + ?Sized>(n: usize, noise: f64, rng: &mut R) -> Result<GaussianState> {
    let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        noise * x
    });
    let cov = CovarianceMatrix::new(DMatrix::identity(2 * n, 2 * n) + &a * a.transpose())?;
    let mean = DVector::from_fn(2 * n, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        x
    });
    GaussianState::new(mean, cov)
}

/// Physicality check on the state's covariance matrix.
pub fn is_physical(st: &GaussianState) -> bool {
    check_physicality(&st.cov).is_physical
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::is_symplectic;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn squeezed_orientation() {
        let s = 0.4;
        let v0 = make_squeezed(s, 0.0).unwrap();
        assert_relative_eq!(v0.cov().matrix()[(0, 0)], (-2.0 * s).exp(), epsilon = 1e-14);
        assert_relative_eq!(v0.cov().matrix()[(1, 1)], (2.0 * s).exp(), epsilon = 1e-14);
        let v1 = make_squeezed(s, FRAC_PI_2).unwrap();
        assert_relative_eq!(v1.cov().matrix()[(0, 0)], (2.0 * s).exp(), epsilon = 1e-14);
        assert_relative_eq!(v1.cov().matrix()[(1, 1)], (-2.0 * s).exp(), epsilon = 1e-14);
        assert!(v1.cov().matrix()[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn orthogonal_squeezers_make_tmsv() {
        let s = 0.7;
        let input = make_squeezed(s, 0.0).unwrap().tensor(&make_squeezed(s, FRAC_PI_2).unwrap());
        let out = input.apply_beam_splitter(0, 1).unwrap();
        let expected = make_tmsv(s).unwrap();
        assert!((out.cov().matrix() - expected.cov().matrix()).amax() < 1e-12);
    }

    #[test]
    fn thermal_zero_is_vacuum() {
        assert_eq!(make_thermal(&[0.0, 0.0]).unwrap(), make_vacuum(2));
        assert!(make_thermal(&[-1.0]).is_err());
        assert!(make_tmsv(-0.1).is_err());
        assert!(make_squeezed(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn qcs_closed_forms() {
        assert_relative_eq!(qcs2_gaussian(&make_vacuum(3)).unwrap(), 1.0, epsilon = 1e-14);
        let s = 0.9;
        assert_relative_eq!(qcs2_gaussian(&make_squeezed(s, 0.0).unwrap()).unwrap(), (2.0 * s).cosh(), epsilon = 1e-12);
        assert_relative_eq!(qcs2_gaussian(&make_thermal(&[3.0]).unwrap()).unwrap(), 1.0 / 7.0, epsilon = 1e-14);
        let t = make_tmsv(0.7).unwrap();
        assert_relative_eq!(qcs2_gaussian_char_oracle(&t).unwrap(), 1.4f64.cosh(), epsilon = 1e-12);
        assert_relative_eq!(qcs2_gaussian(&t).unwrap(), 1.4f64.cosh(), epsilon = 1e-12);
        assert_relative_eq!(qcs2_gaussian_char_oracle(&make_vacuum(2)).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn log_negativity_cases() {
        let bp = Bipartition::new(1, 1).unwrap();
        let v = log_negativity_gaussian(&make_vacuum(2), &bp).unwrap();
        assert_eq!((v.value, v.n_minus), (0.0, 0));
        let t = log_negativity_gaussian(&make_tmsv(0.5).unwrap(), &bp).unwrap();
        assert_relative_eq!(t.value, 1.0, epsilon = 1e-12);
        assert_eq!(t.n_minus, 1);
        let th = log_negativity_gaussian(&make_thermal(&[0.3, 2.0]).unwrap(), &bp).unwrap();
        assert_eq!((th.value, th.n_minus), (0.0, 0));
    }

    #[test]
    fn random_states_are_physical_and_deterministic() {
        let cfg = RandomStateConfig::default();
        let a = random_gaussian_state(3, 42, &cfg).unwrap();
        let b = random_gaussian_state(3, 42, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(is_physical(&a));
        let passive = RandomStateConfig { profile: PurityProfile::Pure, max_squeezing: 0.0 };
        let p = random_gaussian_state(3, 7, &passive).unwrap();
        assert_relative_eq!(qcs2_gaussian(&p).unwrap(), 1.0, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(is_symplectic(&random_symplectic(4, 1.5, &mut rng), 1e-10));
    }

    #[test]
    fn json_schema_errors_name_the_field() {
        let mut j = make_tmsv(0.3).unwrap().to_json();
        j.mean.pop();
        match GaussianState::from_json(&j) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "mean"),
            other => panic!("unexpected {other:?}"),
        }
        let mut j = make_tmsv(0.3).unwrap().to_json();
        j.cov[2].push(0.0);
        match GaussianState::from_json(&j) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "cov[2]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
