//! Truncated multimode Fock space.
//!
//! Amplitude tensors are stored flat in row-major order (last mode varies
//! fastest) over the box `{0..d_1} x ... x {0..d_n}` of per-mode cutoffs.
//! States carry the amplitudes of the truncated expansion as-is, so
//! `tail_mass = 1 - ‖amps‖²` is the weight lost to truncation; measures are
//! evaluated on the renormalised state and refuse to run when the tail
//! exceeds the state's tolerance.

mod beam_splitter;
mod density;
mod families;
mod state;

pub use beam_splitter::{apply_beam_splitter_fock, apply_beam_splitter_fock_with_cutoffs, beam_splitter_block};
pub use density::{qcs2_fock, FockDensityOperator};
pub use families::{
    appendix_c_state, make_fock_coherent, make_fock_squeezed, make_fock_squeezed_auto, make_fock_tmsv,
    make_fock_tmsv_auto, random_pure_state, saturating_family, squeezed_cutoff, tmsv_cutoff, LocalUnitary,
};
pub use state::{
    entanglement_entropy, log_negativity_pure, mtn_pure, schmidt_coefficients, total_noise, FockMoments,
    FockPureState, FockStateJson,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Default truncation tolerance on the discarded weight.
pub const TAU_TRUNC: f64 = 1e-10;
/// Singular values below this are dropped from Schmidt spectra.
pub const SCHMIDT_FLOOR: f64 = 1e-14;
/// Largest per-mode cutoff any constructor will pick automatically.
pub const MAX_CUTOFF: usize = 4096;

pub(crate) fn strides(cutoffs: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cutoffs.len()];
    for k in (0..cutoffs.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cutoffs[k + 1];
    }
    s
}

pub(crate) fn decode(mut flat: usize, cutoffs: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; cutoffs.len()];
    for k in (0..cutoffs.len()).rev() {
        idx[k] = flat % cutoffs[k];
        flat /= cutoffs[k];
    }
    idx
}

pub(crate) fn encode(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides).map(|(i, s)| i * s).sum()
}

/// `a_k` applied to a flat vector over the box.
pub(crate) fn lower(v: &[Complex64], cutoffs: &[usize], mode: usize) -> Vec<Complex64> {
    let stride = strides(cutoffs)[mode];
    let d = cutoffs[mode];
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % d;
        if i + 1 < d {
            *o = v[flat + stride] * ((i + 1) as f64).sqrt();
        }
    }
    out
}

/// `a_k†` applied to a flat vector; weight pushed past the cutoff is dropped.
pub(crate) fn raise(v: &[Complex64], cutoffs: &[usize], mode: usize) -> Vec<Complex64> {
    let stride = strides(cutoffs)[mode];
    let d = cutoffs[mode];
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % d;
        if i >= 1 {
            *o = v[flat - stride] * (i as f64).sqrt();
        }
    }
    out
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Single-mode operator matrices on `{|0>, ..., |d-1>}`.
#[derive(Debug, Clone)]
pub struct QuadratureOps {
    pub cutoff: usize,
    pub a: DMatrix<Complex64>,
    pub a_dag: DMatrix<Complex64>,
    pub x: DMatrix<Complex64>,
    pub p: DMatrix<Complex64>,
    pub number: DMatrix<Complex64>,
}

impl QuadratureOps {
    pub fn new(cutoff: usize) -> Self {
        let mut a = DMatrix::zeros(cutoff, cutoff);
        for k in 1..cutoff {
            a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        let a_dag = a.adjoint();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = (&a + &a_dag) * Complex64::new(h, 0.0);
        let p = (&a - &a_dag) * Complex64::new(0.0, -h);
        let number = &a_dag * &a;
        Self {
            cutoff,
            a,
            a_dag,
            x,
            p,
            number,
        }
    }

    /// `[X, P]`; equals `i` on every level except the top one.
    pub fn commutator_xp(&self) -> DMatrix<Complex64> {
        &self.x * &self.p - &self.p * &self.x
    }
}
