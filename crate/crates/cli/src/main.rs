use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bosonic_bounds::bounds::{
    corollary2_checks, entanglement_bounds, g, entanglement_check, na_star_solvers, theorem2_bound,
    theorem2_twomode_refined, total_noise_check, BoundCheck,
};
use bosonic_bounds::experiments::{
    input_families, manifest_path, run_appendix_c_demo, run_appendix_d, run_fig1_left, run_fig1_right, run_fig2,
    run_random_audit, AppendixDSpec, AuditKind, AuditSpec, Manifest, NaStarFigureSpec, SweepRow, SweepSpec, Table,
    Tolerances,
};
use bosonic_bounds::fock::{
    apply_beam_splitter_fock, entanglement_entropy, log_negativity_pure, mtn_pure, qcs2_fock, total_noise,
    FockDensityOperator, FockPureState, FockStateJson,
};
use bosonic_bounds::gaussian::{measure_report, GaussianState, GaussianStateJson, PurityProfile, RandomStateConfig};
use bosonic_bounds::symplectic::check_physicality;
use bosonic_bounds::{Bipartition, Error};

/// Largest Fock dimension for which `measure` also evaluates the commutator form of C².
const COMMUTATOR_MAX_DIM: usize = 1024;

#[derive(Parser, Debug)]
#[command(name = "bosonic-bounds", version, about = "Entanglement and nonclassicality measures and bounds for bosonic states")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Write results here instead of stdout (figures and audits also write a manifest).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for randomized commands.
    #[arg(long, env = "BOSONIC_BOUNDS_SEED", global = true)]
    seed: Option<u64>,
    /// Report entropies in ebits (log base 2) instead of nats.
    #[arg(long, global = true)]
    ebits: bool,
    /// Worker threads for figures and audits.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Violation tolerance for bound checks.
    #[arg(long, global = true)]
    tau_check: Option<f64>,
    /// Saturation tolerance for bound checks.
    #[arg(long, global = true)]
    tau_sat: Option<f64>,
    /// Largest discarded Fock weight accepted by measures.
    #[arg(long, global = true)]
    tau_trunc: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measures of a Gaussian or Fock state read from a JSON file.
    Measure(StateArgs),
    /// Check bounds, either on a state file or on supplied values.
    BoundCheck(BoundCheckArgs),
    /// Solve for the optimal photon split N_A*.
    Nastar(NastarArgs),
    /// Send a Fock state through a balanced beam splitter.
    Beamsplitter(BeamsplitterArgs),
    /// Regenerate the data behind a figure.
    Figure(FigureArgs),
    /// Randomized bound audit; exits with status 3 on any violation.
    Audit(AuditArgs),
    /// Non-Gaussian state that beats the pure-Gaussian bound.
    AppendixC(AppendixCArgs),
}

#[derive(Args, Debug)]
struct StateArgs {
    /// Gaussian-state JSON file (`n`, `mean`, `cov`).
    #[arg(long, conflicts_with = "fock", required_unless_present = "fock")]
    gaussian: Option<PathBuf>,
    /// Pure Fock-state JSON file (`n`, `cutoffs`, sparse `amps`).
    #[arg(long)]
    fock: Option<PathBuf>,
    /// Split as n_A:n_B with A on the leading modes (default: halves, A smaller).
    #[arg(long)]
    bipartition: Option<String>,
}

#[derive(Args, Debug)]
struct BoundCheckArgs {
    #[command(flatten)]
    state: OptionalStateArgs,
    /// Entanglement bound to apply to (ef, mtn) values, or `all` for every
    /// bound valid on arbitrary pure states.
    #[arg(long, default_value = "all")]
    bound: String,
    /// Entanglement entropy in nats.
    #[arg(long)]
    ef: Option<f64>,
    /// Mean total noise.
    #[arg(long)]
    mtn: Option<f64>,
    /// Log-negativity for the log-negativity checks.
    #[arg(long)]
    en: Option<f64>,
    /// Optical nonclassicality C².
    #[arg(long)]
    qcs2: Option<f64>,
    /// Number of modes for the log-negativity checks.
    #[arg(long)]
    modes: Option<usize>,
    /// Number of partially transposed symplectic eigenvalues below one.
    #[arg(long)]
    n_minus: Option<usize>,
    /// det V for the two-mode refined check.
    #[arg(long)]
    det_v: Option<f64>,
    /// Split as n_A:n_B.
    #[arg(long)]
    bipartition: Option<String>,
}

#[derive(Args, Debug)]
struct OptionalStateArgs {
    /// Gaussian-state JSON file.
    #[arg(long, conflicts_with = "fock")]
    gaussian: Option<PathBuf>,
    /// Pure Fock-state JSON file.
    #[arg(long)]
    fock: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NastarArgs {
    /// Total mean photon number.
    #[arg(long = "N")]
    total: f64,
    /// Modes held by A (the smaller party).
    #[arg(long = "nA")]
    n_a: usize,
    /// Modes held by B.
    #[arg(long = "nB")]
    n_b: usize,
    /// Solver name or `all`.
    #[arg(long, default_value = "bisection")]
    method: String,
}

#[derive(Args, Debug)]
struct BeamsplitterArgs {
    /// Number-state input, e.g. `N=10,0` for |10>|0>.
    #[arg(long, conflicts_with_all = ["state", "family"])]
    fock: Option<String>,
    /// Fock-state JSON file.
    #[arg(long, conflicts_with = "family")]
    state: Option<PathBuf>,
    /// Input family name (see `figure fig1-right`).
    #[arg(long, requires = "param")]
    family: Option<String>,
    /// Family parameter (squeezing or photon number).
    #[arg(long)]
    param: Option<f64>,
    /// Modes the beam splitter acts on, as `i,j`.
    #[arg(long, default_value = "0,1")]
    modes: String,
    /// Split of the output as n_A:n_B.
    #[arg(long, default_value = "1:1")]
    bipartition: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FigureName {
    Fig1Left,
    Fig1Right,
    Fig2,
    AppendixD,
}

#[derive(Args, Debug)]
struct FigureArgs {
    #[arg(value_enum)]
    name: FigureName,
    /// Input family for fig1-right (default: all).
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated parameter grid (fig1-right), nu grid (fig1-left, fig2) or photon numbers (appendix-d).
    #[arg(long)]
    grid: Option<String>,
    /// n_A for fig1-left and fig2.
    #[arg(long)]
    n_a: Option<usize>,
    /// Comma-separated n_B values for fig1-left and fig2.
    #[arg(long)]
    n_b: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AuditKindArg {
    Gaussian,
    GaussianPure,
    Classical,
    Fock,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Ensemble to sample.
    #[arg(long, value_enum, default_value_t = AuditKindArg::Gaussian)]
    kind: AuditKindArg,
    /// Modes per state.
    #[arg(long, default_value_t = 2)]
    modes: usize,
    /// Number of random states.
    #[arg(long, default_value_t = 1000)]
    states: usize,
    /// Comma-separated sizes of party A (default: every split).
    #[arg(long)]
    splits: Option<String>,
    /// Comma-separated per-mode cutoffs for Fock audits (default 8 per mode).
    #[arg(long)]
    cutoffs: Option<String>,
    /// Noise scale for the classical control group.
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
}

#[derive(Args, Debug)]
struct AppendixCArgs {
    /// Geometric weight of the correlated number states, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// Level of B that the local permutation swaps with a single photon in the second B mode.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

enum Outcome {
    Clean,
    Violations,
}

struct Session {
    opts: GlobalOpts,
    tolerances: Tolerances,
}

impl Session {
    fn entropy(&self, nats: f64) -> f64 {
        if self.opts.ebits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }

    fn unit(&self) -> &'static str {
        if self.opts.ebits {
            "ebits"
        } else {
            "nats"
        }
    }

    fn entropy_check(&self, c: &BoundCheck) -> BoundCheck {
        let mut c = c.rejudged(self.tolerances.tau_check, self.tolerances.tau_sat);
        c.lhs = self.entropy(c.lhs);
        c.rhs = self.entropy(c.rhs);
        c.margin = self.entropy(c.margin);
        c
    }

    fn check(&self, c: &BoundCheck) -> BoundCheck {
        c.rejudged(self.tolerances.tau_check, self.tolerances.tau_sat)
    }

    fn config(&self) -> Value {
        json!({
            "seed": self.opts.seed,
            "units": self.unit(),
            "tolerances": self.tolerances,
            "library_version": bosonic_bounds::VERSION,
        })
    }

    fn table(&self, mut t: Table) -> Table {
        if self.opts.ebits {
            for (k, h) in t.header.iter_mut().enumerate() {
                if h.ends_with("[nats]") {
                    *h = h.replace("[nats]", "[ebits]");
                    for row in &mut t.rows {
                        if let bosonic_bounds::experiments::Cell::Float(x) = &mut row[k] {
                            *x /= std::f64::consts::LN_2;
                        }
                    }
                }
            }
        }
        t
    }

    /// Emits a JSON value to the output path or stdout.
    fn emit_json(&self, value: &Value) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        match &self.opts.output {
            Some(path) => std::fs::write(path, text).map_err(|e| output_error(path, e))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// Emits a table, with a manifest next to it when writing to a file.
    fn emit_table(&self, table: &Table, manifest: &Manifest) -> anyhow::Result<()> {
        match (self.opts.format, &self.opts.output) {
            (Format::Csv, Some(path)) => {
                bosonic_bounds::experiments::write_outputs(path, table, manifest)?;
                log::info!("wrote {} and {}", path.display(), manifest_path(path).display());
            }
            (Format::Csv, None) => std::io::stdout().write_all(table.to_csv_string()?.as_bytes())?,
            (Format::Json, _) => self.emit_json(&json!({ "manifest": manifest, "rows": table.to_json() }))?,
        }
        Ok(())
    }
}

fn output_error(path: &Path, e: std::io::Error) -> Error {
    Error::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &'static str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|e| anyhow::Error::from(Error::InvalidParameter { name: what, reason: format!("`{x}`: {e}") }))
        })
        .collect()
}

fn read_gaussian(path: &Path) -> anyhow::Result<GaussianState> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: GaussianStateJson = serde_json::from_str(&text)
        .map_err(|e| Error::Schema { field: "state".into(), reason: e.to_string() })
        .with_context(|| format!("parsing {}", path.display()))?;
    GaussianState::from_json(&json).with_context(|| format!("loading {}", path.display()))
}

fn read_fock(path: &Path, tol: f64) -> anyhow::Result<FockPureState> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: FockStateJson = serde_json::from_str(&text)
        .map_err(|e| Error::Schema { field: "state".into(), reason: e.to_string() })
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(FockPureState::from_json(&json)
        .with_context(|| format!("loading {}", path.display()))?
        .with_tail_tolerance(tol))
}

fn bipartition_for(spec: Option<&str>, n: usize) -> anyhow::Result<Bipartition> {
    let bp = match spec {
        Some(s) => Bipartition::parse(s)?,
        None => {
            if n < 2 {
                bail!(Error::InvalidParameter {
                    name: "bipartition",
                    reason: "a bipartition needs at least two modes".into()
                });
            }
            Bipartition::new(n / 2, n - n / 2)?
        }
    };
    bp.check_modes(n)?;
    Ok(bp)
}

/// Physicality gate for Gaussian inputs; reports the smallest symplectic eigenvalue.
fn require_physical(st: &GaussianState) -> anyhow::Result<()> {
    let report = check_physicality(st.cov());
    if !report.is_physical {
        bail!(Error::InvalidParameter {
            name: "cov",
            reason: format!(
                "covariance matrix is unphysical: smallest symplectic eigenvalue {:.6e} < 1",
                report.min_symplectic_eig
            ),
        });
    }
    Ok(())
}

fn measure(ctx: &Session, args: &StateArgs) -> anyhow::Result<Outcome> {
    if let Some(path) = &args.gaussian {
        let st = read_gaussian(path)?;
        require_physical(&st)?;
        let bp = bipartition_for(args.bipartition.as_deref(), st.modes())?;
        let r = measure_report(&st, &bp)?;
        ctx.emit_json(&json!({
            "representation": "gaussian",
            "modes": st.modes(),
            "bipartition": format!("{}:{}", bp.n_a(), bp.n_b()),
            "qcs2": r.qcs2,
            "ftot": r.ftot,
            "log_negativity": ctx.entropy(r.log_negativity),
            "n_minus": r.n_minus,
            "purity": r.purity,
            "symplectic_spectrum": r.spectrum,
            "partial_transpose_spectrum": r.spectrum_pt,
            "config": ctx.config(),
        }))?;
        return Ok(Outcome::Clean);
    }
    let path = args.fock.as_ref().expect("clap enforces one state");
    let psi = read_fock(path, ctx.tolerances.tau_trunc)?;
    let bp = bipartition_for(args.bipartition.as_deref(), psi.modes())?;
    let dim = psi.amplitudes().len();
    let qcs2 = if dim <= COMMUTATOR_MAX_DIM {
        let rho = FockDensityOperator::from_pure(&psi).with_tail_tolerance(ctx.tolerances.tau_trunc);
        Some(qcs2_fock(&rho)?)
    } else {
        None
    };
    ctx.emit_json(&json!({
        "representation": "fock",
        "modes": psi.modes(),
        "cutoffs": psi.cutoffs(),
        "bipartition": format!("{}:{}", bp.n_a(), bp.n_b()),
        "total_noise": total_noise(&psi)?,
        "mtn": mtn_pure(&psi)?,
        "qcs2": qcs2,
        "mean_photons": psi.mean_photon_numbers(),
        "entanglement_entropy": ctx.entropy(entanglement_entropy(&psi, &bp)?),
        "log_negativity": ctx.entropy(log_negativity_pure(&psi, &bp)?),
        "tail_mass": psi.tail_mass(),
        "config": ctx.config(),
    }))?;
    Ok(Outcome::Clean)
}

fn entanglement_bound_checks(ctx: &Session, name: &str, ef: f64, mtn: f64, bp: &Bipartition) -> anyhow::Result<Vec<BoundCheck>> {
    let registry = entanglement_bounds();
    let selected: Vec<_> = if name.eq_ignore_ascii_case("all") {
        registry.iter().filter(|b| b.universal()).collect()
    } else {
        vec![registry.get(name)?]
    };
    selected
        .into_iter()
        .map(|b| {
            let rhs = b.bound(mtn, bp.n_a(), bp.n_b())?;
            Ok(ctx.entropy_check(&BoundCheck::new(ef, rhs, format!("ef_mtn_{}", b.name().replace('-', "_")))))
        })
        .collect()
}

fn bound_check(ctx: &Session, args: &BoundCheckArgs) -> anyhow::Result<Outcome> {
    let mut checks: Vec<BoundCheck> = Vec::new();
    let mut context = serde_json::Map::new();
    if let Some(path) = &args.state.gaussian {
        let st = read_gaussian(path)?;
        require_physical(&st)?;
        let bp = bipartition_for(args.bipartition.as_deref(), st.modes())?;
        let r = measure_report(&st, &bp)?;
        let n = st.modes();
        checks.push(ctx.entropy_check(&theorem2_bound(r.log_negativity, r.qcs2, n, r.n_minus)?));
        let c2 = corollary2_checks(r.qcs2, r.log_negativity, n)?;
        checks.extend(c2.exponential_growth.iter().chain(&c2.separability).map(|c| ctx.check(c)));
        if n == 2 && r.n_minus > 0 {
            checks.push(ctx.check(&theorem2_twomode_refined(r.qcs2, r.log_negativity, st.cov().determinant())?));
        }
        context.insert("qcs2".into(), json!(r.qcs2));
        context.insert("log_negativity".into(), json!(ctx.entropy(r.log_negativity)));
        context.insert("n_minus".into(), json!(r.n_minus));
    } else if let Some(path) = &args.state.fock {
        let psi = read_fock(path, ctx.tolerances.tau_trunc)?;
        let bp = bipartition_for(args.bipartition.as_deref(), psi.modes())?;
        let ef = entanglement_entropy(&psi, &bp)?;
        let mtn = mtn_pure(&psi)?;
        if args.bound.eq_ignore_ascii_case("all") {
            checks.push(ctx.entropy_check(&total_noise_check(ef, mtn, psi.modes())?));
            checks.push(ctx.entropy_check(&entanglement_check(ef, mtn, bp.n_a(), bp.n_b())?));
        } else {
            checks.extend(entanglement_bound_checks(ctx, &args.bound, ef, mtn, &bp)?);
        }
        context.insert("ef".into(), json!(ctx.entropy(ef)));
        context.insert("mtn".into(), json!(mtn));
    } else {
        if let (Some(ef), Some(mtn)) = (args.ef, args.mtn) {
            let bp = Bipartition::parse(args.bipartition.as_deref().unwrap_or("1:1"))?;
            checks.extend(entanglement_bound_checks(ctx, &args.bound, ef, mtn, &bp)?);
        }
        if let (Some(en), Some(qcs2)) = (args.en, args.qcs2) {
            let n = args.modes.unwrap_or(2);
            let n_minus = args.n_minus.unwrap_or(if en > 0.0 { 1 } else { 0 });
            checks.push(ctx.entropy_check(&theorem2_bound(en, qcs2, n, n_minus)?));
            let c2 = corollary2_checks(qcs2, en, n)?;
            checks.extend(c2.exponential_growth.iter().chain(&c2.separability).map(|c| ctx.check(c)));
            if let Some(det_v) = args.det_v {
                checks.push(ctx.check(&theorem2_twomode_refined(qcs2, en, det_v)?));
            }
        }
        if checks.is_empty() {
            bail!(Error::InvalidParameter {
                name: "bound-check",
                reason: "give a state file, --ef with --mtn, or --en with --qcs2".into()
            });
        }
    }
    let holds = checks.iter().all(|c| c.holds);
    ctx.emit_json(&json!({
        "holds": holds,
        "checks": checks,
        "inputs": context,
        "config": ctx.config(),
    }))?;
    Ok(if holds { Outcome::Clean } else { Outcome::Violations })
}

fn nastar(ctx: &Session, args: &NastarArgs) -> anyhow::Result<Outcome> {
    let registry = na_star_solvers();
    let solvers: Vec<_> = if args.method.eq_ignore_ascii_case("all") {
        registry.iter().collect()
    } else {
        vec![registry.get(&args.method)?]
    };
    let solutions = solvers
        .into_iter()
        .map(|s| {
            let sol = s.solve(args.total, args.n_a, args.n_b)?;
            let value = sol.value()?;
            let mut v = serde_json::to_value(&sol)?;
            v["nu_star"] = json!(sol.nu_star());
            v["bound"] = json!(ctx.entropy(value));
            Ok(v)
        })
        .collect::<anyhow::Result<Vec<Value>>>()?;
    ctx.emit_json(&json!({ "solutions": solutions, "config": ctx.config() }))?;
    Ok(Outcome::Clean)
}

fn parse_fock_spec(spec: &str) -> anyhow::Result<Vec<usize>> {
    let body = spec.trim();
    let body = body.strip_prefix("N=").or_else(|| body.strip_prefix("n=")).unwrap_or(body);
    let photons: Vec<usize> = parse_list(body, "fock")?;
    if photons.len() < 2 {
        bail!(Error::InvalidParameter {
            name: "fock",
            reason: "need photon numbers for at least two modes".into()
        });
    }
    Ok(photons)
}

fn beamsplitter(ctx: &Session, args: &BeamsplitterArgs) -> anyhow::Result<Outcome> {
    let tol = ctx.tolerances.tau_trunc;
    let bp = Bipartition::parse(&args.bipartition)?;
    let (label, mtn_in, output) = if let Some(family) = &args.family {
        let registry = input_families();
        let fam = registry.get(family)?;
        let param = args.param.expect("clap requires --param with --family");
        let inst = fam.build(param, None, tol)?;
        (format!("{}({}={param})", fam.name(), fam.parameter()), inst.mtn_in, inst.output)
    } else {
        let input = match (&args.fock, &args.state) {
            (Some(spec), _) => FockPureState::fock(&parse_fock_spec(spec)?)?.with_tail_tolerance(tol),
            (None, Some(path)) => read_fock(path, tol)?,
            (None, None) => bail!(Error::InvalidParameter {
                name: "beamsplitter",
                reason: "give --fock, --state or --family".into()
            }),
        };
        let modes: Vec<usize> = parse_list(&args.modes, "modes")?;
        if modes.len() != 2 {
            bail!(Error::InvalidParameter { name: "modes", reason: "expected two modes `i,j`".into() });
        }
        let mtn_in = mtn_pure(&input)?;
        let output = apply_beam_splitter_fock(&input, modes[0], modes[1])?;
        (args.fock.clone().unwrap_or_else(|| "state".into()), mtn_in, output)
    };
    bp.check_modes(output.modes())?;
    let ef = entanglement_entropy(&output, &bp)?;
    let n = output.modes();
    let bound = total_noise_check(ef, mtn_in, n)?;
    let g_in = g(((mtn_in - 1.0) / 2.0).max(0.0))?;
    let optimal = entanglement_check(ef, mtn_in, bp.n_a(), bp.n_b())?;
    ctx.emit_json(&json!({
        "input": label,
        "mtn_in": mtn_in,
        "mtn_out": mtn_pure(&output)?,
        "ef_out": ctx.entropy(ef),
        "g_in": ctx.entropy(g_in),
        "ratio": if g_in > 0.0 { ef / g_in } else { 0.0 },
        "bound": ctx.entropy_check(&bound),
        "optimal_split_bound": ctx.entropy_check(&optimal),
        "cutoffs": output.cutoffs(),
        "tail_mass": output.tail_mass(),
        "units": ctx.unit(),
        "config": ctx.config(),
    }))?;
    Ok(Outcome::Clean)
}

fn figure(ctx: &Session, args: &FigureArgs) -> anyhow::Result<Outcome> {
    let name = match args.name {
        FigureName::Fig1Left => "fig1-left",
        FigureName::Fig1Right => "fig1-right",
        FigureName::Fig2 => "fig2",
        FigureName::AppendixD => "appendix-d",
    };
    let (table, spec): (Table, Value) = match args.name {
        FigureName::Fig1Left | FigureName::Fig2 => {
            let mut spec = NaStarFigureSpec::default();
            if let Some(g) = &args.grid {
                spec.nus = parse_list(g, "grid")?;
            }
            if let Some(a) = args.n_a {
                spec.n_a = a;
            }
            if let Some(b) = &args.n_b {
                spec.n_bs = parse_list(b, "n_b")?;
            }
            let t = if args.name == FigureName::Fig1Left {
                run_fig1_left(&spec)?
            } else {
                run_fig2(&spec)?
            };
            (t, serde_json::to_value(&spec)?)
        }
        FigureName::Fig1Right => {
            let registry = input_families();
            let families: Vec<String> = match &args.family {
                Some(f) => vec![registry.get(f)?.name().to_string()],
                None => registry.names().iter().map(|s| s.to_string()).collect(),
            };
            let mut rows = Vec::new();
            let mut specs = Vec::new();
            for fam in &families {
                let mut spec = SweepSpec::new(fam);
                spec.tolerances = ctx.tolerances;
                if let Some(g) = &args.grid {
                    spec.grid = Some(parse_list(g, "grid")?);
                }
                rows.extend(run_fig1_right(&spec)?);
                specs.push(spec);
            }
            for r in rows.iter().filter(|r| !r.is_ok()) {
                log::warn!("{} at {}: {}", r.family, r.parameter, r.status);
            }
            (SweepRow::table(&rows, "parameter"), serde_json::to_value(&specs)?)
        }
        FigureName::AppendixD => {
            let mut spec = AppendixDSpec::default();
            if let Some(g) = &args.grid {
                spec.photon_numbers = parse_list(g, "grid")?;
            }
            (run_appendix_d(&spec)?, serde_json::to_value(&spec)?)
        }
    };
    let table = ctx.table(table);
    let manifest = Manifest::new(name, &spec, ctx.opts.seed, ctx.tolerances);
    ctx.emit_table(&table, &manifest)?;
    Ok(Outcome::Clean)
}

fn audit(ctx: &Session, args: &AuditArgs) -> anyhow::Result<Outcome> {
    let seed = ctx.opts.seed.unwrap_or(0);
    let kind = match args.kind {
        AuditKindArg::Gaussian => AuditKind::Gaussian(RandomStateConfig::default()),
        AuditKindArg::GaussianPure => AuditKind::Gaussian(RandomStateConfig {
            profile: PurityProfile::Pure,
            ..RandomStateConfig::default()
        }),
        AuditKindArg::Classical => AuditKind::GaussianClassical { noise: args.noise },
        AuditKindArg::Fock => AuditKind::Fock {
            cutoffs: match &args.cutoffs {
                Some(c) => parse_list(c, "cutoffs")?,
                None => vec![8; args.modes],
            },
            decay: 0.3,
        },
    };
    let spec = AuditSpec {
        kind,
        n: args.modes,
        states: args.states,
        seed,
        splits: args.splits.as_deref().map(|s| parse_list(s, "splits")).transpose()?,
        tolerances: ctx.tolerances,
    };
    let report = run_random_audit(&spec)?;
    for v in &report.violations {
        log::error!(
            "violation of {} at instance {} (n_A = {}, seed {}): margin {:.3e}",
            v.check.provenance,
            v.index,
            v.n_a,
            seed,
            v.check.margin
        );
    }
    let manifest = Manifest::new("audit", &spec, Some(seed), ctx.tolerances);
    match ctx.opts.format {
        Format::Csv => ctx.emit_table(&report.table(), &manifest)?,
        Format::Json => ctx.emit_json(&json!({
            "passed": report.passed(),
            "report": report,
            "manifest": manifest,
        }))?,
    }
    Ok(if report.passed() { Outcome::Clean } else { Outcome::Violations })
}

fn appendix_c(ctx: &Session, args: &AppendixCArgs) -> anyhow::Result<Outcome> {
    let r = run_appendix_c_demo(args.q, args.k)?;
    match ctx.opts.format {
        Format::Csv => {
            let manifest = Manifest::new("appendix-c", &json!({"q": args.q, "k": args.k}), ctx.opts.seed, ctx.tolerances);
            ctx.emit_table(&ctx.table(r.table()), &manifest)?
        }
        Format::Json => ctx.emit_json(&json!({
            "q": r.q,
            "k": r.k,
            "cutoff": r.cutoff,
            "mean_photons_q": r.mean_photons_q,
            "mean_photons_prime": r.mean_photons_prime,
            "mtn_q": r.mtn_q,
            "mtn_prime": r.mtn_prime,
            "ef": ctx.entropy(r.ef),
            "gaussian_bound": ctx.entropy_check(&r.gaussian_bound),
            "optimal_split_bound": ctx.entropy_check(&r.optimal_split_bound),
            "gaussian_bound_violated": r.gaussian_bound_violated,
            "optimal_split_bound_holds": r.optimal_split_bound_holds,
            "config": ctx.config(),
        }))?,
    }
    Ok(Outcome::Clean)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let opts = cli.global.clone();
    let mut tolerances = Tolerances::default();
    if let Some(t) = opts.tau_check {
        tolerances.tau_check = t;
    }
    if let Some(t) = opts.tau_sat {
        tolerances.tau_sat = t;
    }
    if let Some(t) = opts.tau_trunc {
        tolerances.tau_trunc = t;
    }
    tolerances.validate()?;
    if let Some(jobs) = opts.jobs {
        if jobs == 0 {
            bail!(Error::InvalidParameter { name: "jobs", reason: "must be >= 1".into() });
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let ctx = Session { opts, tolerances };
    match &cli.command {
        Command::Measure(a) => measure(&ctx, a),
        Command::BoundCheck(a) => bound_check(&ctx, a),
        Command::Nastar(a) => nastar(&ctx, a),
        Command::Beamsplitter(a) => beamsplitter(&ctx, a),
        Command::Figure(a) => figure(&ctx, a),
        Command::Audit(a) => audit(&ctx, a),
        Command::AppendixC(a) => appendix_c(&ctx, a),
    }
}

/// Write failures exit with 1; every other error is a validation failure (2).
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Output { .. }) => 1,
        _ if err.downcast_ref::<std::io::Error>().is_some() && err.chain().count() == 1 => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
