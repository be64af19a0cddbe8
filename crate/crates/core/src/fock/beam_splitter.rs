use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::{decode, encode, strides, FockPureState};
use crate::error::{Error, Result};

/// Matrix elements `<m, N−m| B |k, N−k>` of the balanced beam splitter on
/// the `N`-photon sector, indexed `(m, k)`.
///
/// Entries are `2^{-N/2} K_{m,k} sqrt(m!(N−m)!/(k!(N−k)!))` where `K_{m,k}` is
/// the coefficient of `x^m` in `(x−1)^k (x+1)^{N−k}`. The integer
/// coefficients are computed exactly, so the block stays orthogonal to
/// rounding precision for any `N`.
pub fn beam_splitter_block(total: usize) -> DMatrix<f64> {
    let n = total;
    let ln_fact = ln_factorials(n);
    let half_ln2_n = 0.5 * n as f64 * std::f64::consts::LN_2;
    let mut block = DMatrix::zeros(n + 1, n + 1);

    // p = (x+1)^N
    let mut p: Vec<BigInt> = Vec::with_capacity(n + 1);
    let mut c = BigInt::from(1);
    for i in 0..=n {
        p.push(c.clone());
        c = c * (n - i) / (i + 1);
    }
    for k in 0..=n {
        for (m, coeff) in p.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let (sign, ln_abs) = signed_ln(coeff);
            let ln_val = ln_abs - half_ln2_n
                + 0.5 * (ln_fact[m] + ln_fact[n - m] - ln_fact[k] - ln_fact[n - k]);
            block[(m, k)] = sign * ln_val.exp();
        }
        if k < n {
            p = times_x_minus_one_over_x_plus_one(&p);
        }
    }
    block
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn signed_ln(x: &BigInt) -> (f64, f64) {
    let sign = if x.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let mag = x.magnitude();
    let bits = mag.bits();
    let shift = bits.saturating_sub(60);
    let head = (mag >> shift).to_f64().unwrap_or(f64::INFINITY);
    (sign, head.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// `p(x) (x−1)/(x+1)`, exact; `p` must be divisible by `x+1`.
fn times_x_minus_one_over_x_plus_one(p: &[BigInt]) -> Vec<BigInt> {
    let deg = p.len() - 1;
    let mut q = vec![BigInt::zero(); deg];
    q[deg - 1] = p[deg].clone();
    for i in (1..deg).rev() {
        q[i - 1] = &p[i] - &q[i];
    }
    debug_assert_eq!(&p[0], &q[0]);
    let mut r = vec![BigInt::zero(); deg + 1];
    for i in 0..=deg {
        let lo = if i >= 1 { q[i - 1].clone() } else { BigInt::zero() };
        let hi = if i < deg { q[i].clone() } else { BigInt::zero() };
        r[i] = lo - hi;
    }
    r
}

/// Balanced beam splitter on modes `i`, `j`. The output box grows to
/// `d_i + d_j − 1` on both modes so no weight is lost.
pub fn apply_beam_splitter_fock(psi: &FockPureState, i: usize, j: usize) -> Result<FockPureState> {
    check_pair(psi, i, j)?;
    let d = psi.cutoffs()[i] + psi.cutoffs()[j] - 1;
    apply_inner(psi, i, j, (d, d))
}

/// Beam splitter with explicit output cutoffs for modes `i` and `j`.
/// Fails with [`Error::CutoffOverflow`] if the truncation pushes the total
/// tail past the state's tolerance.
pub fn apply_beam_splitter_fock_with_cutoffs(
    psi: &FockPureState,
    i: usize,
    j: usize,
    out: (usize, usize),
) -> Result<FockPureState> {
    check_pair(psi, i, j)?;
    if out.0 == 0 || out.1 == 0 {
        return Err(Error::param("cutoffs", "output cutoffs must be >= 1"));
    }
    apply_inner(psi, i, j, out)
}

fn check_pair(psi: &FockPureState, i: usize, j: usize) -> Result<()> {
    let n = psi.modes();
    for m in [i, j] {
        if m >= n {
            return Err(Error::ModeIndex { index: m, modes: n });
        }
    }
    if i == j {
        return Err(Error::param("modes", "beam splitter needs two distinct modes"));
    }
    Ok(())
}

fn apply_inner(psi: &FockPureState, i: usize, j: usize, out: (usize, usize)) -> Result<FockPureState> {
    let cut_in = psi.cutoffs();
    let mut cut_out = cut_in.to_vec();
    cut_out[i] = out.0;
    cut_out[j] = out.1;
    let st_in = strides(cut_in);
    let st_out = strides(&cut_out);
    let dim_out: usize = cut_out.iter().product();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim_out];
    let mut blocks: HashMap<usize, DMatrix<f64>> = HashMap::new();
    let mut discarded = 0.0;

    // Iterate over configurations of the spectator modes (i and j pinned to 0).
    let mut rest_cut = cut_in.to_vec();
    rest_cut[i] = 1;
    rest_cut[j] = 1;
    let rest_dim: usize = rest_cut.iter().product();
    let (di, dj) = (cut_in[i], cut_in[j]);
    for rest in 0..rest_dim {
        let idx = decode(rest, &rest_cut);
        let base_in = encode(&idx, &st_in);
        let base_out = encode(&idx, &st_out);
        for total in 0..(di + dj - 1) {
            let k_lo = total.saturating_sub(dj - 1);
            let k_hi = total.min(di - 1);
            let src: Vec<(usize, Complex64)> = (k_lo..=k_hi)
                .map(|k| (k, psi.amplitudes()[base_in + k * st_in[i] + (total - k) * st_in[j]]))
                .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
                .collect();
            if src.is_empty() {
                continue;
            }
            let block = blocks.entry(total).or_insert_with(|| beam_splitter_block(total));
            for m in 0..=total {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, a) in &src {
                    acc += a * block[(m, *k)];
                }
                if m < out.0 && total - m < out.1 {
                    amps[base_out + m * st_out[i] + (total - m) * st_out[j]] = acc;
                } else {
                    discarded += acc.norm_sqr();
                }
            }
        }
    }

    let tail = psi.tail_mass() + discarded;
    if tail > psi.tail_tolerance() {
        return Err(Error::CutoffOverflow {
            discarded,
            tolerance: psi.tail_tolerance(),
        });
    }
    Ok(FockPureState::from_parts_unchecked(cut_out, amps, psi.tail_tolerance()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{entanglement_entropy, log_negativity_pure};
    use crate::symplectic::Bipartition;
    use approx::assert_relative_eq;

    #[test]
    fn blocks_are_orthogonal() {
        for n in [0, 1, 2, 5, 17, 60, 200] {
            let b = beam_splitter_block(n);
            let err = (b.transpose() * &b - DMatrix::identity(n + 1, n + 1)).amax();
            assert!(err < 1e-11, "N={n}: {err}");
        }
    }

    #[test]
    fn single_photon_splits_antisymmetrically() {
        let psi = FockPureState::fock(&[1, 0]).unwrap();
        let out = apply_beam_splitter_fock(&psi, 0, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(out.amplitude(&[1, 0]).re, h, epsilon = 1e-14);
        assert_relative_eq!(out.amplitude(&[0, 1]).re, -h, epsilon = 1e-14);
    }

    #[test]
    fn two_photon_interference() {
        let psi = FockPureState::fock(&[1, 1]).unwrap();
        let out = apply_beam_splitter_fock(&psi, 0, 1).unwrap();
        assert!(out.amplitude(&[1, 1]).norm() < 1e-14);
        assert_relative_eq!(out.amplitude(&[2, 0]).norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_relative_eq!(out.amplitude(&[0, 2]).norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
        let bp = Bipartition::new(1, 1).unwrap();
        assert_relative_eq!(log_negativity_pure(&out, &bp).unwrap(), 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(entanglement_entropy(&out, &bp).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn spectator_modes_untouched() {
        let psi = FockPureState::fock(&[1, 2, 0]).unwrap();
        let out = apply_beam_splitter_fock(&psi, 0, 2).unwrap();
        assert_eq!(out.cutoffs(), &[2, 3, 2]);
        assert_relative_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);
        for idx in [[1, 2, 0], [0, 2, 1]] {
            assert_relative_eq!(out.amplitude(&idx).norm_sqr(), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn truncated_output_reports_overflow() {
        let psi = FockPureState::fock(&[4, 0]).unwrap();
        assert!(matches!(
            apply_beam_splitter_fock_with_cutoffs(&psi, 0, 1, (3, 5)),
            Err(Error::CutoffOverflow { .. })
        ));
        let ok = apply_beam_splitter_fock_with_cutoffs(&psi, 0, 1, (5, 5)).unwrap();
        assert_relative_eq!(ok.norm_sqr(), 1.0, epsilon = 1e-13);
        assert!(matches!(apply_beam_splitter_fock(&psi, 0, 0), Err(Error::InvalidParameter { .. })));
    }
}
