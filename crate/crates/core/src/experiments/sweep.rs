use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{linspace, Cell, Table, Tolerances};
use crate::bounds::g;
use crate::error::{Error, Result};
use crate::fock::{
    apply_beam_splitter_fock, entanglement_entropy, make_fock_squeezed, make_fock_squeezed_auto, make_fock_tmsv, make_fock_tmsv_auto,
    mtn_pure, FockPureState,
};
use crate::registry::{Named, Registry};
use crate::symplectic::Bipartition;

/// Output of one family member: the two-mode state after the beam splitter
/// and the mean total noise of the input.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub mtn_in: f64,
    pub output: FockPureState,
}

/// Two-mode input states fed through a balanced beam splitter.
pub trait InputFamily: Named + Send + Sync {
    /// Name of the swept parameter, used as the CSV column header.
    fn parameter(&self) -> &'static str;
    fn default_grid(&self) -> Vec<f64>;
    /// Builds the instance; `cutoff` overrides the automatic per-mode cutoff.
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance>;
}

fn photon_number(param: f64) -> Result<usize> {
    if param < 0.0 || param.fract() != 0.0 || !param.is_finite() {
        return Err(Error::param("N", format!("photon number must be a non-negative integer, got {param}")));
    }
    Ok(param as usize)
}

fn through_beam_splitter(input: FockPureState, tol: f64) -> Result<FamilyInstance> {
    let input = input.with_tail_tolerance(tol);
    let mtn_in = mtn_pure(&input)?;
    let output = apply_beam_splitter_fock(&input, 0, 1)?;
    Ok(FamilyInstance { mtn_in, output })
}

fn squeezed_mode(s: f64, phi: f64, cutoff: Option<usize>, tol: f64) -> Result<FockPureState> {
    match cutoff {
        Some(d) => make_fock_squeezed(s, phi, d),
        None => make_fock_squeezed_auto(s, phi, tol),
    }
}

/// `|N> ⊗ |0>`.
pub struct FockN0;
/// `|N> ⊗ |N>`.
pub struct FockNN;
/// `|2s, 0> ⊗ |0>`: one mode squeezed with parameter `2s`.
pub struct SqueezedWithVacuum;
/// `|s*, 0> ⊗ |s*, π/2>`: orthogonally squeezed inputs.
pub struct SqueezedSymmetric;
/// The two-mode squeezed vacuum `TMSV(r)` built directly; it is the beam
/// splitter output of the orthogonally squeezed pair.
pub struct TmsvDirect;

impl Named for FockN0 {
    fn name(&self) -> &'static str {
        "fock_N0"
    }
    fn description(&self) -> &'static str {
        "|N>|0> through the beam splitter"
    }
}

impl InputFamily for FockN0 {
    fn parameter(&self) -> &'static str {
        "N"
    }
    fn default_grid(&self) -> Vec<f64> {
        [1, 2, 3, 5, 8, 13, 20, 30, 50, 80, 120, 200, 300].iter().map(|&n| n as f64).collect()
    }
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance> {
        let n = photon_number(param)?;
        let d = cutoff.unwrap_or(0).max(n + 1);
        through_beam_splitter(FockPureState::number_state(&[n, 0], vec![d, 1])?, tol)
    }
}

impl Named for FockNN {
    fn name(&self) -> &'static str {
        "fock_NN"
    }
    fn description(&self) -> &'static str {
        "|N>|N> through the beam splitter"
    }
}

impl InputFamily for FockNN {
    fn parameter(&self) -> &'static str {
        "N"
    }
    fn default_grid(&self) -> Vec<f64> {
        [1, 2, 3, 5, 8, 13, 20, 30, 50, 80, 120, 150].iter().map(|&n| n as f64).collect()
    }
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance> {
        let n = photon_number(param)?;
        let d = cutoff.unwrap_or(0).max(n + 1);
        through_beam_splitter(FockPureState::number_state(&[n, n], vec![d, d])?, tol)
    }
}

impl Named for SqueezedWithVacuum {
    fn name(&self) -> &'static str {
        "squeezed_2s_vac"
    }
    fn description(&self) -> &'static str {
        "|2s,0>|0> through the beam splitter"
    }
}

impl InputFamily for SqueezedWithVacuum {
    fn parameter(&self) -> &'static str {
        "s"
    }
    fn default_grid(&self) -> Vec<f64> {
        linspace(0.05, 0.6, 12)
    }
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance> {
        let sq = squeezed_mode(2.0 * param, 0.0, cutoff, tol)?;
        through_beam_splitter(sq.tensor(&FockPureState::vacuum(vec![1])?), tol)
    }
}

impl Named for SqueezedSymmetric {
    fn name(&self) -> &'static str {
        "squeezed_sym"
    }
    fn description(&self) -> &'static str {
        "|s*,0>|s*,pi/2> through the beam splitter"
    }
}

impl InputFamily for SqueezedSymmetric {
    fn parameter(&self) -> &'static str {
        "s_star"
    }
    fn default_grid(&self) -> Vec<f64> {
        linspace(0.1, 1.2, 12)
    }
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance> {
        let a = squeezed_mode(param, 0.0, cutoff, tol)?;
        let b = squeezed_mode(param, std::f64::consts::FRAC_PI_2, cutoff, tol)?;
        through_beam_splitter(a.tensor(&b), tol)
    }
}

impl Named for TmsvDirect {
    fn name(&self) -> &'static str {
        "tmsv_direct"
    }
    fn description(&self) -> &'static str {
        "two-mode squeezed vacuum built directly (output of the symmetric squeezed pair)"
    }
}

impl InputFamily for TmsvDirect {
    fn parameter(&self) -> &'static str {
        "r"
    }
    fn default_grid(&self) -> Vec<f64> {
        linspace(0.1, 1.5, 15)
    }
    fn build(&self, param: f64, cutoff: Option<usize>, tol: f64) -> Result<FamilyInstance> {
        let output = match cutoff {
            Some(d) => make_fock_tmsv(param, d)?,
            None => make_fock_tmsv_auto(param, tol)?,
        };
        // the beam splitter preserves total noise, so the output value is the input value
        let mtn_in = mtn_pure(&output)?;
        Ok(FamilyInstance { mtn_in, output })
    }
}

pub fn input_families() -> Registry<dyn InputFamily> {
    let mut reg: Registry<dyn InputFamily> = Registry::new("input family");
    let entries: [Box<dyn InputFamily>; 5] = [
        Box::new(FockN0),
        Box::new(FockNN),
        Box::new(SqueezedWithVacuum),
        Box::new(SqueezedSymmetric),
        Box::new(TmsvDirect),
    ];
    for e in entries {
        reg.register(e).expect("built-in names are unique");
    }
    reg
}

/// Configuration of a beam-splitter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: String,
    /// Parameter values; the family default when absent.
    pub grid: Option<Vec<f64>>,
    /// Fixed per-mode input cutoff; chosen from the tail tolerance when absent.
    pub cutoff: Option<usize>,
    pub tolerances: Tolerances,
}

impl SweepSpec {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            grid: None,
            cutoff: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = Some(grid);
        self
    }
}

/// One grid point of a beam-splitter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub parameter: f64,
    pub mtn_in: f64,
    /// `g((M_TN(ψ_in) − 1)/2)`, the two-mode upper bound on the output entanglement.
    pub g_in: f64,
    pub ef_out: f64,
    pub ratio: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    /// `"ok"`, or the diagnostic for a row that could not be computed.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// `E_F(ψ_out) ≤ g_in` up to `tau_check`.
    pub fn satisfies_bound(&self, tau_check: f64) -> bool {
        self.ef_out <= self.g_in + tau_check
    }
}

fn sweep_point(family: &dyn InputFamily, param: f64, spec: &SweepSpec) -> SweepRow {
    let tol = spec.tolerances.tau_trunc;
    let computed = (|| -> Result<SweepRow> {
        let inst = family.build(param, spec.cutoff, tol)?;
        let bp = Bipartition::new(1, 1)?;
        let ef_out = entanglement_entropy(&inst.output, &bp)?;
        let g_in = g(((inst.mtn_in - 1.0) / 2.0).max(0.0))?;
        Ok(SweepRow {
            family: family.name().to_string(),
            parameter: param,
            mtn_in: inst.mtn_in,
            g_in,
            ef_out,
            ratio: if g_in > 0.0 { ef_out / g_in } else { 0.0 },
            cutoff: inst.output.cutoffs().iter().copied().max().unwrap_or(0),
            tail_mass: inst.output.tail_mass(),
            status: "ok".into(),
        })
    })();
    computed.unwrap_or_else(|e| SweepRow {
        family: family.name().to_string(),
        parameter: param,
        mtn_in: f64::NAN,
        g_in: f64::NAN,
        ef_out: f64::NAN,
        ratio: f64::NAN,
        cutoff: 0,
        tail_mass: f64::NAN,
        status: e.to_string(),
    })
}

/// Entanglement generated by the beam splitter versus the input bound, over
/// the family's parameter grid. Rows that fail carry their diagnostic in
/// `status`; an unknown family or invalid tolerances fail the whole run.
pub fn run_fig1_right(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.tolerances.validate()?;
    let registry = input_families();
    let family = registry.get(&spec.family)?;
    let grid = spec.grid.clone().unwrap_or_else(|| family.default_grid());
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::param("grid", "all grid values must be finite"));
    }
    Ok(grid.par_iter().map(|&p| sweep_point(family, p, spec)).collect())
}

impl SweepRow {
    pub fn header(parameter: &str) -> Vec<String> {
        vec![
            "family".into(),
            parameter.to_string(),
            "mtn_in".into(),
            "g_in [nats]".into(),
            "ef_out [nats]".into(),
            "ratio".into(),
            "cutoff".into(),
            "tail_mass".into(),
            "status".into(),
        ]
    }

    pub fn to_cells(&self) -> Vec<Cell> {
        vec![
            self.family.as_str().into(),
            self.parameter.into(),
            self.mtn_in.into(),
            self.g_in.into(),
            self.ef_out.into(),
            self.ratio.into(),
            self.cutoff.into(),
            self.tail_mass.into(),
            self.status.as_str().into(),
        ]
    }

    pub fn table(rows: &[SweepRow], parameter: &str) -> Table {
        let mut t = Table {
            header: Self::header(parameter),
            rows: Vec::new(),
        };
        for r in rows {
            t.push(r.to_cells());
        }
        t
    }
}

/// Photon-number grid for the large-`N` comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixDSpec {
    pub photon_numbers: Vec<usize>,
}

impl Default for AppendixDSpec {
    fn default() -> Self {
        Self {
            photon_numbers: vec![10, 20, 40, 80],
        }
    }
}

/// Exact output entanglement for `|N,0>` and `|N,N>` inputs next to the
/// large-`N` estimates `½ ln(2πeN)`, `½ ln(πeN/2)` (the Gaussian
/// approximation to a Binomial(N, ½) entropy) and `ln(πN/4)`.
pub fn run_appendix_d(spec: &AppendixDSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "N",
        "ef_n0 [nats]",
        "ratio_n0",
        "half_ln_2pi_e_n [nats]",
        "gap_n0 [nats]",
        "binomial_gaussian_estimate [nats]",
        "ef_nn [nats]",
        "ratio_nn",
        "ln_pi_n_over_4 [nats]",
        "gap_nn [nats]",
    ]);
    let bp = Bipartition::new(1, 1)?;
    let tol = Tolerances::default().tau_trunc;
    let rows: Vec<Result<Vec<Cell>>> = spec
        .photon_numbers
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let n0 = FockN0.build(nf, None, tol)?;
            let nn = FockNN.build(nf, None, tol)?;
            let ef_n0 = entanglement_entropy(&n0.output, &bp)?;
            let ef_nn = entanglement_entropy(&nn.output, &bp)?;
            let pi = std::f64::consts::PI;
            let e = std::f64::consts::E;
            let est_n0 = 0.5 * (2.0 * pi * e * nf).ln();
            let est_nn = (pi * nf / 4.0).ln();
            Ok(vec![
                n.into(),
                ef_n0.into(),
                (ef_n0 / g(nf / 2.0)?).into(),
                est_n0.into(),
                (ef_n0 - est_n0).abs().into(),
                (0.5 * (pi * e * nf / 2.0).ln()).into(),
                ef_nn.into(),
                (ef_nn / g(nf)?).into(),
                est_nn.into(),
                (ef_nn - est_nn).abs().into(),
            ])
        })
        .collect();
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}
