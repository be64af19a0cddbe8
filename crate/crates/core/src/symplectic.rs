//! Real symplectic linear algebra on covariance matrices.
//!
//! Quadratures are interleaved, `(X1, P1, ..., Xn, Pn)`, and the vacuum has
//! `V = 1`. Symplectic eigenvalues are the moduli of the eigenvalues of
//! `i Ω V`; they are obtained from the Hermitian matrix `i V^{1/2} Ω V^{1/2}`,
//! which is similar to it.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative symmetry tolerance for covariance matrices.
pub const TAU_SYM: f64 = 1e-10;
/// Eigenvalues at or below this are treated as non-positive.
pub const TAU_PD: f64 = 1e-12;
/// Physicality slack on symplectic eigenvalues; also the `n_-` dead band.
pub const TAU_PHYS: f64 = 1e-9;

/// A `2n x 2n` real symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape and symmetry, then stores the symmetrised matrix.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if r == 0 || r % 2 != 0 {
            return Err(Error::param(
                "cov",
                format!("dimension must be a positive even number, got {r}"),
            ));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("cov", "entries must be finite"));
        }
        let scale = entries.amax().max(1.0);
        let deviation = (&entries - entries.transpose()).amax();
        if deviation > TAU_SYM * scale {
            return Err(Error::AsymmetricInput { deviation });
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self {
            modes: r / 2,
            entries: sym,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            entries: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Ordinary eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn ensure_positive_definite(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min <= TAU_PD {
            return Err(Error::NonPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        match self.entries.clone().cholesky() {
            Some(ch) if self.min_eigenvalue() > TAU_PD => Ok(ch.inverse()),
            _ => Err(Error::NonPositiveDefinite {
                min_eigenvalue: self.min_eigenvalue(),
            }),
        }
    }

    /// Symmetric square root `V^{1/2}`; requires positive definiteness.
    pub fn sqrt(&self) -> Result<DMatrix<f64>> {
        let eig = SymmetricEigen::new(self.entries.clone());
        let min = eig.eigenvalues.min();
        if min <= TAU_PD {
            return Err(Error::NonPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        let q = &eig.eigenvectors;
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        Ok(q * d * q.transpose())
    }

    /// `S V S^T`.
    pub fn conjugate(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.shape() != self.entries.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.nrows(),
            });
        }
        Self::new(s * &self.entries * s.transpose())
    }

    /// Covariance matrix of the listed modes, in the listed order.
    pub fn submatrix(&self, modes: &[usize]) -> Result<Self> {
        let idx = quadrature_indices(modes, self.modes)?;
        Ok(Self {
            modes: modes.len(),
            entries: DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
                self.entries[(idx[i], idx[j])]
            }),
        })
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.entries);
        m.view_mut((a, a), (b, b)).copy_from(&other.entries);
        Self {
            modes: self.modes + other.modes,
            entries: m,
        }
    }
}

pub(crate) fn quadrature_indices(modes: &[usize], total: usize) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(2 * modes.len());
    for &m in modes {
        if m >= total {
            return Err(Error::ModeIndex {
                index: m,
                modes: total,
            });
        }
        idx.push(2 * m);
        idx.push(2 * m + 1);
    }
    Ok(idx)
}

/// `Ω = ⊕_k [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub modes: usize,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Self {
        Self { modes }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.modes, 2 * self.modes);
        for k in 0..self.modes {
            m[(2 * k, 2 * k + 1)] = 1.0;
            m[(2 * k + 1, 2 * k)] = -1.0;
        }
        m
    }
}

/// `true` when `S Ω S^T = Ω` entrywise to `tol`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> bool {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return false;
    }
    let omega = SymplecticForm::new(s.nrows() / 2).matrix();
    (s * &omega * s.transpose() - omega).amax() <= tol
}

/// Split of the modes into parties A and B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    /// A owns modes `0..n_a`, B owns `n_a..n_a + n_b`.
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        Self::from_modes((0..n_a).collect(), (n_a..n_a + n_b).collect())
    }

    pub fn from_modes(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::param("bipartition", "both parties need at least one mode"));
        }
        let n = a.len() + b.len();
        let mut seen = vec![false; n];
        for &m in a.iter().chain(&b) {
            if m >= n || seen[m] {
                return Err(Error::param(
                    "bipartition",
                    format!("modes must be a partition of 0..{n}"),
                ));
            }
            seen[m] = true;
        }
        Ok(Self { a, b })
    }

    /// Parses `"n_A:n_B"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (a, b) = spec
            .split_once(':')
            .ok_or_else(|| Error::param("bipartition", format!("expected n_A:n_B, got `{spec}`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::param("bipartition", format!("`{s}`: {e}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }

    pub fn n_a(&self) -> usize {
        self.a.len()
    }

    pub fn n_b(&self) -> usize {
        self.b.len()
    }

    pub fn modes(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn a_modes(&self) -> &[usize] {
        &self.a
    }

    pub fn b_modes(&self) -> &[usize] {
        &self.b
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn check_modes(&self, modes: usize) -> Result<()> {
        if self.modes() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                found: self.modes(),
            });
        }
        Ok(())
    }
}

/// Symplectic eigenvalues of `V`, ascending.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = v.modes();
    let root = v.sqrt()?;
    let omega = SymplecticForm::new(n).matrix();
    let m = &root * omega * &root;
    let h: DMatrix<Complex64> = m.map(|x| Complex64::new(0.0, x));
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let mut nu: Vec<f64> = ev.into_iter().take(n).collect();
    nu.sort_by(f64::total_cmp);
    Ok(nu)
}

/// `Str V = 2 Σ ν_i`.
pub fn symplectic_trace(v: &CovarianceMatrix) -> Result<f64> {
    Ok(2.0 * symplectic_eigenvalues(v)?.iter().sum::<f64>())
}

/// `T_B V T_B`, flipping the sign of every `P` quadrature owned by B.
pub fn partial_transpose(v: &CovarianceMatrix, bp: &Bipartition) -> Result<CovarianceMatrix> {
    bp.check_modes(v.modes())?;
    let mut sign = vec![1.0; v.dim()];
    for &m in bp.b_modes() {
        sign[2 * m + 1] = -1.0;
    }
    let m = v.matrix();
    Ok(CovarianceMatrix {
        modes: v.modes(),
        entries: DMatrix::from_fn(v.dim(), v.dim(), |i, j| sign[i] * sign[j] * m[(i, j)]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalityReport {
    pub is_physical: bool,
    /// Smallest symplectic eigenvalue; `0` when `V` is not positive definite.
    pub min_symplectic_eig: f64,
}

pub fn check_physicality(v: &CovarianceMatrix) -> PhysicalityReport {
    match symplectic_eigenvalues(v) {
        Ok(nu) => PhysicalityReport {
            is_physical: nu[0] >= 1.0 - TAU_PHYS,
            min_symplectic_eig: nu[0],
        },
        Err(_) => PhysicalityReport {
            is_physical: false,
            min_symplectic_eig: 0.0,
        },
    }
}
