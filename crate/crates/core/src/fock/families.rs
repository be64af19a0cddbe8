use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{decode, encode, strides, FockPureState, MAX_CUTOFF, TAU_TRUNC};
use crate::error::{Error, Result};

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite"))
    }
}

fn squeezed_amplitudes(s: f64, phi: f64, cutoff: usize) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoff];
    let ratio = -Complex64::from_polar(s.abs().tanh(), 2.0 * phi) * s.signum();
    let mut c = Complex64::new(1.0 / s.cosh().sqrt(), 0.0);
    let mut m = 0usize;
    while 2 * m < cutoff {
        amps[2 * m] = c;
        let k = 2 * m;
        c *= ratio * (((k + 1) * (k + 2)) as f64).sqrt() / (2 * (m + 1)) as f64;
        m += 1;
    }
    amps
}

/// Smallest cutoff whose squeezed-vacuum tail is within `tol`.
pub fn squeezed_cutoff(s: f64, tol: f64) -> Result<usize> {
    check_finite("s", s)?;
    let t2 = s.tanh().powi(2);
    let mut p = 1.0 / s.cosh();
    let mut tail = 1.0 - p;
    let mut m = 0usize;
    while tail > tol {
        let k = 2 * m;
        p *= t2 * ((k + 1) * (k + 2)) as f64 / (4 * (m + 1) * (m + 1)) as f64;
        tail -= p;
        m += 1;
        if 2 * m + 1 > MAX_CUTOFF {
            return Err(Error::Truncation {
                tail_mass: tail,
                tolerance: tol,
                needed_cutoff: None,
            });
        }
    }
    Ok(2 * m + 1)
}

/// `S(s, φ)|0>` truncated at `cutoff`. `φ` is the angle of the squeezed
/// quadrature, matching the Gaussian constructor.
pub fn make_fock_squeezed(s: f64, phi: f64, cutoff: usize) -> Result<FockPureState> {
    squeezed_with_tolerance(s, phi, cutoff, TAU_TRUNC)
}

fn squeezed_with_tolerance(s: f64, phi: f64, cutoff: usize, tol: f64) -> Result<FockPureState> {
    check_finite("s", s)?;
    check_finite("phi", phi)?;
    if cutoff == 0 {
        return Err(Error::param("cutoff", "must be >= 1"));
    }
    let psi = FockPureState::from_amplitudes(vec![cutoff], squeezed_amplitudes(s, phi, cutoff))?
        .with_tail_tolerance(tol);
    if psi.tail_mass() > tol {
        return Err(Error::Truncation {
            tail_mass: psi.tail_mass(),
            tolerance: tol,
            needed_cutoff: squeezed_cutoff(s, tol).ok(),
        });
    }
    Ok(psi)
}

/// Squeezed vacuum with the cutoff chosen so the tail stays below `tol / 2`.
pub fn make_fock_squeezed_auto(s: f64, phi: f64, tol: f64) -> Result<FockPureState> {
    squeezed_with_tolerance(s, phi, squeezed_cutoff(s, tol * 0.5)?, tol)
}

/// Smallest per-mode cutoff whose two-mode squeezed vacuum tail is within `tol`.
pub fn tmsv_cutoff(r: f64, tol: f64) -> Result<usize> {
    check_finite("r", r)?;
    let t = r.abs().tanh();
    if t == 0.0 {
        return Ok(1);
    }
    let d = (tol.ln() / (2.0 * t.ln())).ceil().max(1.0);
    if d > MAX_CUTOFF as f64 {
        return Err(Error::Truncation {
            tail_mass: t.powf(2.0 * MAX_CUTOFF as f64),
            tolerance: tol,
            needed_cutoff: None,
        });
    }
    Ok(d as usize)
}

/// `cosh(r)^{-1} Σ_k tanh(r)^k |k, k>`.
pub fn make_fock_tmsv(r: f64, cutoff: usize) -> Result<FockPureState> {
    tmsv_with_tolerance(r, cutoff, TAU_TRUNC)
}

fn tmsv_with_tolerance(r: f64, cutoff: usize, tol: f64) -> Result<FockPureState> {
    check_finite("r", r)?;
    if cutoff == 0 {
        return Err(Error::param("cutoff", "must be >= 1"));
    }
    let psi = FockPureState::from_amplitudes(vec![cutoff, cutoff], tmsv_raw(r, cutoff))?.with_tail_tolerance(tol);
    if psi.tail_mass() > tol {
        return Err(Error::Truncation {
            tail_mass: psi.tail_mass(),
            tolerance: tol,
            needed_cutoff: tmsv_cutoff(r, tol).ok(),
        });
    }
    Ok(psi)
}

/// Two-mode squeezed vacuum with the cutoff chosen so the tail stays below `tol / 2`.
pub fn make_fock_tmsv_auto(r: f64, tol: f64) -> Result<FockPureState> {
    tmsv_with_tolerance(r, tmsv_cutoff(r, tol * 0.5)?, tol)
}

/// Product of coherent states `|α_1> ⊗ ... ⊗ |α_n>`, each truncated at `cutoff`.
pub fn make_fock_coherent(alpha: &[Complex64], cutoff: usize) -> Result<FockPureState> {
    if alpha.is_empty() || cutoff == 0 {
        return Err(Error::param("alpha", "need at least one mode and cutoff >= 1"));
    }
    let mut psi: Option<FockPureState> = None;
    for a in alpha {
        let mut amps = Vec::with_capacity(cutoff);
        let mut c = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
        for k in 0..cutoff {
            amps.push(c);
            c *= a / ((k + 1) as f64).sqrt();
        }
        let single = FockPureState::from_amplitudes(vec![cutoff], amps)?;
        psi = Some(match psi {
            None => single,
            Some(p) => p.tensor(&single),
        });
    }
    let psi = psi.expect("non-empty");
    psi.check_truncation()?;
    Ok(psi)
}

/// Local unitary acting as a phased permutation of the Fock basis of a group
/// of modes: `U|b> = e^{iφ_b} |π(b)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    dims: Vec<usize>,
    image: Vec<usize>,
    phases: Vec<f64>,
}

impl LocalUnitary {
    pub fn identity(dims: Vec<usize>) -> Self {
        let dim = dims.iter().product();
        Self {
            dims,
            image: (0..dim).collect(),
            phases: vec![0.0; dim],
        }
    }

    /// Diagonal phases, one per flat basis index.
    pub fn with_phases(dims: Vec<usize>, phases: Vec<f64>) -> Result<Self> {
        let mut u = Self::identity(dims);
        if phases.len() != u.image.len() {
            return Err(Error::DimensionMismatch {
                expected: u.image.len(),
                found: phases.len(),
            });
        }
        u.phases = phases;
        Ok(u)
    }

    pub fn permutation(dims: Vec<usize>, image: Vec<usize>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if image.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: image.len(),
            });
        }
        let mut seen = vec![false; dim];
        for &i in &image {
            if i >= dim || std::mem::replace(&mut seen[i], true) {
                return Err(Error::param("image", "must be a permutation of the basis"));
            }
        }
        Ok(Self {
            dims,
            image,
            phases: vec![0.0; dim],
        })
    }

    /// Transposition of two basis states given as photon-number tuples.
    pub fn swap_levels(dims: Vec<usize>, a: &[usize], b: &[usize]) -> Result<Self> {
        for idx in [a, b] {
            if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(i, d)| i >= d) {
                return Err(Error::param("levels", format!("{idx:?} outside {dims:?}")));
            }
        }
        let st = strides(&dims);
        let (fa, fb) = (encode(a, &st), encode(b, &st));
        let mut u = Self::identity(dims);
        u.image.swap(fa, fb);
        Ok(u)
    }

    /// Random phases combined with a random permutation inside every
    /// fixed-total-photon block.
    pub fn random_number_preserving<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Self {
        let dim: usize = dims.iter().product();
        let totals: Vec<usize> = (0..dim).map(|f| decode(f, &dims).iter().sum()).collect();
        let max_total = totals.iter().copied().max().unwrap_or(0);
        let mut image = vec![0; dim];
        for t in 0..=max_total {
            let block: Vec<usize> = (0..dim).filter(|&f| totals[f] == t).collect();
            let mut shuffled = block.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.random_range(0..=i));
            }
            for (src, dst) in block.iter().zip(shuffled) {
                image[*src] = dst;
            }
        }
        let phases = (0..dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        Self { dims, image, phases }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_number_preserving(&self) -> bool {
        self.image.iter().enumerate().all(|(src, &dst)| {
            decode(src, &self.dims).iter().sum::<usize>() == decode(dst, &self.dims).iter().sum::<usize>()
        })
    }

    /// Applies the unitary to the listed modes of `psi` (whose cutoffs must
    /// match `dims`).
    pub fn apply(&self, psi: &FockPureState, modes: &[usize]) -> Result<FockPureState> {
        let n = psi.modes();
        for &m in modes {
            if m >= n {
                return Err(Error::ModeIndex { index: m, modes: n });
            }
        }
        let local: Vec<usize> = modes.iter().map(|&m| psi.cutoffs()[m]).collect();
        if local != self.dims {
            return Err(Error::param("modes", format!("cutoffs {local:?} do not match unitary dims {:?}", self.dims)));
        }
        let st = strides(psi.cutoffs());
        let lst = strides(&self.dims);
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
        for (flat, a) in psi.amplitudes().iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let mut idx = decode(flat, psi.cutoffs());
            let sub: Vec<usize> = modes.iter().map(|&m| idx[m]).collect();
            let src = encode(&sub, &lst);
            let dst = decode(self.image[src], &self.dims);
            for (k, &m) in modes.iter().enumerate() {
                idx[m] = dst[k];
            }
            out[encode(&idx, &st)] = a * Complex64::from_polar(1.0, self.phases[src]);
        }
        Ok(FockPureState::from_parts_unchecked(psi.cutoffs().to_vec(), out, psi.tail_tolerance()))
    }
}

/// `(U_A ⊗ U_B) ⊗_{k} TMSV(r)` on `n` modes, pairing mode `k` of A (modes
/// `0..n/2`) with mode `k` of B (modes `n/2..n`); every mode uses `cutoff`.
pub fn saturating_family(
    n: usize,
    r: f64,
    ua: &LocalUnitary,
    ub: &LocalUnitary,
    cutoff: usize,
) -> Result<FockPureState> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::param("n", "must be a positive even number of modes"));
    }
    if !ua.is_number_preserving() || !ub.is_number_preserving() {
        return Err(Error::NotNumberPreserving);
    }
    let pair = make_fock_tmsv(r, cutoff).or_else(|e| match e {
        // the product tail is checked below
        Error::Truncation { .. } => Ok(FockPureState::from_parts_unchecked(
            vec![cutoff, cutoff],
            tmsv_raw(r, cutoff),
            TAU_TRUNC,
        )),
        other => Err(other),
    })?;
    let half = n / 2;
    let mut psi = pair.clone();
    for _ in 1..half {
        psi = psi.tensor(&pair);
    }
    // tensor order is A1 B1 A2 B2 ...; regroup to A1..A_h B1..B_h
    let order: Vec<usize> = (0..half).map(|k| 2 * k).chain((0..half).map(|k| 2 * k + 1)).collect();
    let psi = psi.permute_modes(&order)?.with_tail_tolerance(TAU_TRUNC);
    psi.check_truncation()?;
    let a_modes: Vec<usize> = (0..half).collect();
    let b_modes: Vec<usize> = (half..n).collect();
    let psi = ua.apply(&psi, &a_modes)?;
    ub.apply(&psi, &b_modes)
}

fn tmsv_raw(r: f64, cutoff: usize) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoff * cutoff];
    let t = r.tanh();
    let mut c = 1.0 / r.cosh();
    for k in 0..cutoff {
        amps[k * cutoff + k] = Complex64::new(c, 0.0);
        c *= t;
    }
    amps
}

/// `ψ_q = (1−q)^{1/2} Σ_m q^{m/2} |m; m, 0>` on one A mode and two B modes,
/// together with `ψ′ = U_B ψ_q` where `U_B` swaps `|k, 0>` and `|0, 1>` on B.
pub fn appendix_c_state(q: f64, k: usize, cutoff: usize) -> Result<(FockPureState, FockPureState)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", "must lie in (0, 1)"));
    }
    if k < 2 {
        return Err(Error::param("k", "must be an integer > 1"));
    }
    if cutoff == 0 {
        return Err(Error::param("cutoff", "must be >= 1"));
    }
    let tail = q.powi(cutoff as i32);
    if tail > TAU_TRUNC {
        return Err(Error::Truncation {
            tail_mass: tail,
            tolerance: TAU_TRUNC,
            needed_cutoff: Some((TAU_TRUNC.ln() / q.ln()).ceil() as usize),
        });
    }
    let db = cutoff.max(k + 1);
    let cutoffs = vec![cutoff, db, 2];
    let st = strides(&cutoffs);
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoffs.iter().product()];
    let norm = (1.0 - q).sqrt();
    for m in 0..cutoff {
        amps[encode(&[m, m, 0], &st)] = Complex64::new(norm * q.powf(m as f64 / 2.0), 0.0);
    }
    let psi_q = FockPureState::from_amplitudes(cutoffs, amps)?;
    let ub = LocalUnitary::swap_levels(vec![db, 2], &[k, 0], &[0, 1])?;
    let psi_prime = ub.apply(&psi_q, &[1, 2])?;
    Ok((psi_q, psi_prime))
}

/// Random normalised state over the box with amplitude envelope
/// `exp(−decay·|k|₁)` times complex Gaussian noise.
pub fn random_pure_state<R: Rng + ?Sized>(cutoffs: &[usize], decay: f64, rng: &mut R) -> Result<FockPureState> {
    if cutoffs.is_empty() || cutoffs.contains(&0) {
        return Err(Error::param("cutoffs", "need at least one mode and every cutoff >= 1"));
    }
    if !(decay >= 0.0) || !decay.is_finite() {
        return Err(Error::param("decay", "must be finite and non-negative"));
    }
    let dim: usize = cutoffs.iter().product();
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|flat| {
            let total: usize = decode(flat, cutoffs).iter().sum();
            let env = (-decay * total as f64).exp();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * env
        })
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(FockPureState::from_parts_unchecked(cutoffs.to_vec(), amps, TAU_TRUNC))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{entanglement_entropy, log_negativity_pure, mtn_pure, total_noise};
    use crate::gaussian::make_squeezed;
    use crate::symplectic::Bipartition;
    use approx::assert_relative_eq;

    #[test]
    fn squeezed_parity_and_noise() {
        let psi = make_fock_squeezed_auto(0.7, 0.3, TAU_TRUNC).unwrap();
        for (k, a) in psi.amplitudes().iter().enumerate() {
            if k % 2 == 1 {
                assert!(a.norm() < 1e-14);
            }
        }
        assert_relative_eq!(total_noise(&psi).unwrap(), (1.4f64).cosh(), epsilon = 1e-8);
    }

    #[test]
    fn squeezing_axis_matches_gaussian() {
        for phi in [0.0, std::f64::consts::FRAC_PI_4, 1.0, std::f64::consts::FRAC_PI_2] {
            let s = 0.5;
            let fock = make_fock_squeezed_auto(s, phi, TAU_TRUNC).unwrap().moments().cov;
            let gauss = make_squeezed(s, phi).unwrap();
            let err = (fock - gauss.cov().matrix()).amax();
            assert!(err < 1e-8, "phi={phi}: {err}");
        }
    }

    #[test]
    fn tmsv_entanglement() {
        let bp = Bipartition::new(1, 1).unwrap();
        let psi = make_fock_tmsv_auto(0.5, TAU_TRUNC).unwrap();
        // the Schmidt-coefficient sum converges like sqrt(tail), so needs a deeper cutoff
        let deep = make_fock_tmsv(0.5, tmsv_cutoff(0.5, 1e-24).unwrap()).unwrap();
        assert_relative_eq!(log_negativity_pure(&deep, &bp).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(mtn_pure(&psi).unwrap(), 1f64.cosh(), epsilon = 1e-9);
        let zero = make_fock_tmsv_auto(0.0, TAU_TRUNC).unwrap();
        assert_eq!(zero.cutoffs(), &[1, 1]);
        assert!(matches!(make_fock_tmsv(1.0, 5), Err(Error::Truncation { needed_cutoff: Some(_), .. })));
    }

    #[test]
    fn coherent_is_classical() {
        let psi = make_fock_coherent(&[Complex64::new(0.8, -0.3)], 40).unwrap();
        assert_relative_eq!(mtn_pure(&psi).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn shifted_state_photon_numbers() {
        let (psi_q, psi_p) = appendix_c_state(0.5, 2, 40).unwrap();
        assert_relative_eq!(psi_q.mean_photon_number(), 2.0, epsilon = 1e-9);
        assert_relative_eq!(psi_p.mean_photon_number(), 1.875, epsilon = 1e-9);
        assert_relative_eq!(mtn_pure(&psi_q).unwrap(), 7.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(mtn_pure(&psi_p).unwrap(), 2.25, epsilon = 1e-9);
        let bp = Bipartition::new(1, 2).unwrap();
        assert_relative_eq!(
            entanglement_entropy(&psi_q, &bp).unwrap(),
            entanglement_entropy(&psi_p, &bp).unwrap(),
            epsilon = 1e-12
        );
        assert!(appendix_c_state(0.5, 1, 40).is_err());
        assert!(appendix_c_state(0.5, 2, 10).is_err());
    }

    #[test]
    fn local_unitary_checks() {
        let swap = LocalUnitary::swap_levels(vec![3, 2], &[2, 0], &[0, 1]).unwrap();
        assert!(!swap.is_number_preserving());
        let ua = LocalUnitary::identity(vec![5]);
        assert!(matches!(saturating_family(2, 0.3, &ua, &swap, 5), Err(Error::NotNumberPreserving)));
        let mut rng = rand::rng();
        let u = LocalUnitary::random_number_preserving(vec![4, 4], &mut rng);
        assert!(u.is_number_preserving());
    }
}
