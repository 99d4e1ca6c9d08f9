//! Command-line front end. Every invocation prints one JSON object with
//! `command`, `inputs`, `result`, `certificates`, `flags` and `timing_ms`;
//! failures print `command` and `error` instead. Exit codes: 0 success,
//! 2 input error, 3 solver failure.

pub mod format;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edlkit_core::graphstate::{self, DEFAULT_ORBIT_BUDGET};
use edlkit_core::hypergraph::{self, all_k_subsets, TransitivityQuery};
use edlkit_core::qcore::{partial_trace, C64, DenseState, PureVector, Subset};
use edlkit_core::sdp::{SdpStatus, DEFAULT_TOL};
use edlkit_core::symmetric::{self, DickeMixture, Exactness};
use edlkit_core::witness::{self, MAX_SDP_QUBITS};
use serde::Serialize;
use serde_json::{json, Value};

use crate::format::{CollectionFile, GraphFile, State, StateFile, WitnessFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Pure-state overlap at or above `1 - DETERMINED_MARGIN * tol` counts as determined.
const DETERMINED_MARGIN: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    pub fn input(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.into(), message: message.into(), exit: EXIT_INPUT }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError { code: "SOLVER_FAIL".into(), message: message.into(), exit: EXIT_SOLVER }
    }
}

impl From<edlkit_core::Error> for CliError {
    fn from(e: edlkit_core::Error) -> Self {
        let exit = if e.is_solver_failure() { EXIT_SOLVER } else { EXIT_INPUT };
        CliError { code: e.code().into(), message: e.to_string(), exit }
    }
}

#[derive(Parser, Debug)]
#[command(name = "edlkit", version, about = "Entanglement detection and state determination lengths of qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entanglement detection length.
    Edl(EdlArgs),
    /// State determination length.
    Sdl(SdlArgs),
    /// Reduced state on the given particles.
    Marginal(MarginalArgs),
    /// Optimal fully decomposable witness local on all k-subsets.
    Witness(WitnessArgs),
    /// Checks a witness file against a state.
    VerifyWitness(VerifyArgs),
    /// Whether the k-body marginals of a pure state determine it.
    Determine(DetermineArgs),
    /// Entanglement transitivity from a collection of marginals.
    Transitivity(TransitivityArgs),
    /// Fewest k-body marginals that can determine an n-particle state.
    MinCollection(MinCollectionArgs),
    /// Determination-length bounds for a graph state.
    GraphBounds(GraphBoundsArgs),
    /// States whose detection and determination lengths differ maximally.
    GapDemo(GapDemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Analytic,
    Sdp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Pure,
    Mixed,
}

#[derive(Args, Debug, Serialize)]
struct EdlArgs {
    #[arg(long)]
    state: PathBuf,
    /// Defaults to analytic for symmetric kinds and sdp otherwise.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct SdlArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct MarginalArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    keep: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
struct WitnessArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    witness: PathBuf,
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct DetermineArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct TransitivityArgs {
    #[arg(long)]
    collection: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    target: Vec<usize>,
    #[arg(long)]
    edl: usize,
}

#[derive(Args, Debug, Serialize)]
struct MinCollectionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Args, Debug, Serialize)]
struct GraphBoundsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORBIT_BUDGET)]
    budget: usize,
}

#[derive(Args, Debug, Serialize)]
struct GapDemoArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Squared weight of `|D_n^1>` in the pure family.
    #[arg(long)]
    alpha2: Option<f64>,
    /// Dicke-diagonal state for the mixed family.
    #[arg(long)]
    state: Option<PathBuf>,
}

/// Outcome of one invocation: exit code plus the JSON document to print.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub output: Value,
}

struct Report {
    result: Value,
    certificates: Value,
    flags: Vec<String>,
}

impl Report {
    fn new(result: Value, certificates: Value) -> Self {
        Report { result, certificates, flags: Vec::new() }
    }

    fn flag(mut self, f: &str) -> Self {
        self.flags.push(f.into());
        self
    }
}

type Res<T> = std::result::Result<T, CliError>;

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: EXIT_OK, output: json!({ "help": e.to_string() }) };
            }
            return Outcome {
                code: EXIT_INPUT,
                output: json!({ "command": null, "error": { "code": "USAGE", "message": e.to_string() } }),
            };
        }
    };
    let (name, inputs) = describe(&cli.command);
    let start = Instant::now();
    match dispatch(&cli.command) {
        Ok(rep) => Outcome {
            code: EXIT_OK,
            output: json!({
                "command": name,
                "inputs": inputs,
                "result": rep.result,
                "certificates": rep.certificates,
                "flags": rep.flags,
                "timing_ms": start.elapsed().as_secs_f64() * 1e3,
            }),
        },
        Err(e) => Outcome {
            code: e.exit,
            output: json!({
                "command": name,
                "inputs": inputs,
                "error": { "code": e.code, "message": e.message },
            }),
        },
    }
}

fn describe(cmd: &Command) -> (&'static str, Value) {
    match cmd {
        Command::Edl(a) => ("edl", echo(a)),
        Command::Sdl(a) => ("sdl", echo(a)),
        Command::Marginal(a) => ("marginal", echo(a)),
        Command::Witness(a) => ("witness", echo(a)),
        Command::VerifyWitness(a) => ("verify-witness", echo(a)),
        Command::Determine(a) => ("determine", echo(a)),
        Command::Transitivity(a) => ("transitivity", echo(a)),
        Command::MinCollection(a) => ("min-collection", echo(a)),
        Command::GraphBounds(a) => ("graph-bounds", echo(a)),
        Command::GapDemo(a) => ("gap-demo", echo(a)),
    }
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn dispatch(cmd: &Command) -> Res<Report> {
    match cmd {
        Command::Edl(a) => edl(a),
        Command::Sdl(a) => sdl(a),
        Command::Marginal(a) => marginal(a),
        Command::Witness(a) => witness_cmd(a),
        Command::VerifyWitness(a) => verify(a),
        Command::Determine(a) => determine(a),
        Command::Transitivity(a) => transitivity(a),
        Command::MinCollection(a) => min_collection(a),
        Command::GraphBounds(a) => graph_bounds(a),
        Command::GapDemo(a) => gap_demo(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input("IO", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input("BAD_JSON", format!("{}: {e}", path.display())))
}

fn load_state(path: &Path) -> Res<State> {
    read_json::<StateFile>(path)?.parse()
}

fn check_tol(tol: f64) -> Res<()> {
    if tol > 0.0 && tol < 1e-2 {
        Ok(())
    } else {
        Err(CliError::input("BAD_TOL", format!("tolerance {tol} outside (0, 1e-2)")))
    }
}

fn sdp_state(state: &State) -> Res<DenseState> {
    if state.n() > MAX_SDP_QUBITS {
        return Err(edlkit_core::Error::TooLarge(state.n()).into());
    }
    state.to_dense()
}

fn status_name(s: SdpStatus) -> &'static str {
    match s {
        SdpStatus::Optimal => "optimal",
        SdpStatus::MaxIter => "max_iter",
        SdpStatus::Infeasible => "infeasible",
    }
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn edl(a: &EdlArgs) -> Res<Report> {
    check_tol(a.tol)?;
    let state = load_state(&a.state)?;
    let symmetric = matches!(state, State::Diagonal { .. } | State::Symmetric(_));
    let method = a.method.unwrap_or(if symmetric { Method::Analytic } else { Method::Sdp });
    match (method, &state) {
        (Method::Analytic, State::Diagonal { lambda, exact }) => {
            let verdict = symmetric::edl_diagonal(lambda);
            let value = match exact {
                Some(e) => e.edl(),
                None => verdict.value(),
            };
            let mut cert = json!({ "level": value });
            if let Some(k) = value {
                let m = symmetric::diagonal_marginal(lambda, k)?;
                let h = symmetric::hankel_pair(&m);
                cert["hankel_m0"] = json!(matrix_rows(&h.m0));
                cert["hankel_m1"] = json!(matrix_rows(&h.m1));
                cert["min_eigenvalue"] = json!(symmetric::is_ppt_diagonal(&m, 0.0).min_eigenvalue());
                if let Some(e) = exact {
                    let (m0, m1) = e.marginal(k)?.hankel();
                    let text = |m: Vec<Vec<_>>| -> Vec<Vec<String>> {
                        m.iter().map(|r: &Vec<num_rational::BigRational>| r.iter().map(|x| x.to_string()).collect()).collect()
                    };
                    cert["hankel_m0_exact"] = json!(text(m0));
                    cert["hankel_m1_exact"] = json!(text(m1));
                }
            }
            Ok(Report::new(json!({ "edl": value, "exact": true }), cert).flag("EXACT"))
        }
        (Method::Analytic, State::Symmetric(coeffs)) => {
            let r = symmetric::edl_symmetric(coeffs)?;
            let exact = r.exactness == Exactness::Exact;
            let levels: Vec<Value> = r
                .levels
                .iter()
                .map(|l| json!({ "level": l.level, "min_eigenvalue": l.min_eigenvalue, "diagonal": l.diagonal }))
                .collect();
            let rep = Report::new(
                json!({ "edl": r.edl, "exact": exact }),
                json!({ "level": r.edl, "min_eigenvalue": r.certificate, "levels": levels }),
            );
            Ok(rep.flag(if exact { "EXACT" } else { "PPT_BOUND" }))
        }
        (Method::Analytic, _) => Err(CliError::input(
            "UNSUPPORTED",
            format!("analytic method needs a symmetric state, got kind {}", state.kind()),
        )),
        (Method::Sdp, _) => {
            let rho = sdp_state(&state)?;
            let b = witness::edl_upper_bound(&rho, a.tol)?;
            let alphas: Vec<Value> = b.alphas.iter().map(|(k, al)| json!({ "k": k, "alpha": al })).collect();
            let cert = json!({
                "alphas": alphas,
                "witness": b.witness.as_ref().map(WitnessFile::from_witness),
            });
            Ok(Report::new(json!({ "edl_upper_bound": b.level, "exact": false }), cert).flag("UPPER_BOUND"))
        }
    }
}

fn sdl(a: &SdlArgs) -> Res<Report> {
    check_tol(a.tol)?;
    let state = load_state(&a.state)?;
    let diagonal = match &state {
        State::Diagonal { lambda, .. } => Some(lambda.clone()),
        State::Symmetric(s) if s.is_diagonal(symmetric::NONZERO_TOL) => Some(DickeMixture::new(s.diagonal())?),
        _ => None,
    };
    if let Some(lam) = diagonal {
        return sdl_diagonal(&lam);
    }
    let rho = state.to_dense()?;
    if symmetric::rank_criterion_sdl1(&rho)? {
        return Ok(Report::new(json!({ "sdl": 1, "exact": true }), json!({ "rule": "rank_criterion" })).flag("EXACT"));
    }
    match state.as_pure()? {
        Some(psi) => sdl_pure(&psi, a.tol),
        None => Err(CliError::input(
            "UNSUPPORTED",
            "sdl needs a Dicke-diagonal or a pure state; mixed non-diagonal states are not supported",
        )),
    }
}

fn sdl_diagonal(lam: &DickeMixture) -> Res<Report> {
    let r = symmetric::sdl_diagonal(lam)?;
    let mut cert = json!({ "rule": rule_json(r.rule), "flipped": r.flipped });
    // the level just below the answer admits another compatible state
    if r.lo >= 2 {
        let below = r.lo - 1;
        let det = symmetric::level_determines(lam, below)?;
        let alt = symmetric::has_alternative_nonneg(lam, below)?;
        cert["below"] = json!({
            "level": below,
            "unique_diagonal": det.unique_diagonal,
            "free_offsets": det.free_offsets,
            "alternative_lambda": alt.witness,
        });
    }
    let result = json!({ "sdl": if r.exact { Some(r.lo) } else { None }, "lo": r.lo, "hi": r.hi, "exact": r.exact });
    Ok(Report::new(result, cert).flag(if r.exact { "EXACT" } else { "INTERVAL" }))
}

fn rule_json(rule: symmetric::SdlRule) -> Value {
    use symmetric::{FullLevelCondition as F, SdlRule as R};
    match rule {
        R::RankOne => json!({ "name": "rank_one" }),
        R::FullLevel(cond) => {
            let c = match cond {
                F::Ends => "ends",
                F::AllOdd => "all_odd",
                F::AllEven => "all_even",
            };
            json!({ "name": "full_level", "condition": c })
        }
        R::ClosedForm { k, zero } => json!({ "name": "closed_form", "k": k, "zero": zero }),
        R::DerivedRule { k } => json!({ "name": "closed_form_no_zero", "k": k }),
        R::LinearSystems => json!({ "name": "linear_systems" }),
    }
}

fn sdl_pure(psi: &PureVector, tol: f64) -> Res<Report> {
    let n = psi.n();
    if n > MAX_SDP_QUBITS {
        return Err(edlkit_core::Error::TooLarge(n).into());
    }
    let mut levels = Vec::new();
    let mut found = n;
    for k in 1..n {
        let r = witness::pure_determination(psi, &all_k_subsets(n, k)?, tol)?;
        if r.status == SdpStatus::MaxIter && r.alpha - r.lower_bound > 1e3 * tol {
            return Err(CliError::solver(format!("level {k} stalled with overlap in [{}, {}]", r.lower_bound, r.alpha)));
        }
        levels.push(json!({ "k": k, "alpha": r.alpha, "lower_bound": r.lower_bound, "status": status_name(r.status) }));
        if r.alpha >= 1.0 - DETERMINED_MARGIN * tol {
            found = k;
            break;
        }
    }
    Ok(Report::new(json!({ "sdl": found, "exact": true }), json!({ "levels": levels })).flag("SDP"))
}

fn marginal(a: &MarginalArgs) -> Res<Report> {
    let state = load_state(&a.state)?;
    let n = state.n();
    let keep = Subset::from_indices(n, &a.keep)?;
    if keep.is_empty() {
        return Err(edlkit_core::Error::EmptySubset.into());
    }
    let k = keep.len();
    let reduced = match &state {
        State::Diagonal { lambda, exact } => State::Diagonal {
            lambda: symmetric::diagonal_marginal(lambda, k)?,
            exact: exact.as_ref().map(|e| e.marginal(k)).transpose()?,
        },
        State::Symmetric(s) => State::Symmetric(symmetric::symmetric_marginal(s, k)?),
        _ => State::Dense(partial_trace(&state.to_dense()?, &keep)?),
    };
    Ok(Report::new(json!({ "state": StateFile::from_state(&reduced) }), json!({})))
}

fn witness_cmd(a: &WitnessArgs) -> Res<Report> {
    check_tol(a.tol)?;
    let state = load_state(&a.state)?;
    let rho = sdp_state(&state)?;
    let n = rho.n();
    let r = witness::fully_decomposable(&rho, &all_k_subsets(n, a.k)?, a.tol)?;
    let file = WitnessFile::from_witness(&r.witness);
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&file).expect("witness serializes");
        fs::write(out, text).map_err(|e| CliError::input("IO", format!("cannot write {}: {e}", out.display())))?;
    }
    let threshold = witness::noise_threshold(r.alpha, n).ok();
    let result = json!({
        "alpha": r.alpha,
        "entangled": r.alpha < -10.0 * a.tol,
        "noise_threshold": threshold,
        "status": status_name(r.status),
        "iterations": r.iterations,
    });
    let rep = Report::new(result, json!({ "witness": file, "repair_shift": r.repair_shift }));
    Ok(if r.status == SdpStatus::MaxIter { rep.flag("SOLVER_MAXITER") } else { rep })
}

fn verify(a: &VerifyArgs) -> Res<Report> {
    check_tol(a.tol)?;
    let mut w = read_json::<WitnessFile>(&a.witness)?.parse()?;
    let state = load_state(&a.state)?;
    if state.n() != w.n() {
        return Err(CliError::input("DIM_MISMATCH", format!("witness on {} qubits, state on {}", w.n(), state.n())));
    }
    let rho = sdp_state(&state)?;
    let fitted = w.certificates.is_empty();
    if fitted {
        w.certificates = witness::fit_certificates(w.matrix(), w.n(), a.tol * 1e-3)?;
    }
    let v = witness::verify_witness(&w, &rho, a.tol)?;
    let checks: Vec<Value> = v
        .checks
        .iter()
        .map(|ch| {
            json!({ "subset": ch.s.indices(), "residual": ch.residual, "min_eig_p": ch.min_eig_p, "min_eig_q": ch.min_eig_q })
        })
        .collect();
    let result = json!({
        "valid": v.valid,
        "expectation": v.expectation,
        "detects": v.valid && v.expectation < 0.0,
        "failures": v.failures,
    });
    let cert = json!({
        "trace": v.trace,
        "locality_deviation": v.locality_deviation,
        "checks": checks,
        "fitted": fitted,
    });
    Ok(Report::new(result, cert))
}

fn determine(a: &DetermineArgs) -> Res<Report> {
    check_tol(a.tol)?;
    let state = load_state(&a.state)?;
    let psi = state
        .as_pure()?
        .ok_or_else(|| CliError::input("UNSUPPORTED", "determine needs a pure state"))?;
    if psi.n() > MAX_SDP_QUBITS {
        return Err(edlkit_core::Error::TooLarge(psi.n()).into());
    }
    let r = witness::pure_determination(&psi, &all_k_subsets(psi.n(), a.k)?, a.tol)?;
    if r.status == SdpStatus::MaxIter && r.alpha - r.lower_bound > 1e3 * a.tol {
        return Err(CliError::solver(format!("stalled with overlap in [{}, {}]", r.lower_bound, r.alpha)));
    }
    let result = json!({
        "alpha": r.alpha,
        "determined": r.alpha >= 1.0 - DETERMINED_MARGIN * a.tol,
    });
    let cert = json!({ "lower_bound": r.lower_bound, "status": status_name(r.status), "iterations": r.iterations });
    Ok(Report::new(result, cert))
}

fn transitivity(a: &TransitivityArgs) -> Res<Report> {
    let col = read_json::<CollectionFile>(&a.collection)?.parse()?;
    let target = Subset::from_indices(col.n(), &a.target)?;
    let q = TransitivityQuery::new(col.clone(), target)?;
    let holds = hypergraph::transitivity_certificate(&q, a.edl);
    let cert = json!({
        "connected": hypergraph::is_connected(&col),
        "max_subset_size": col.max_edge_size(),
        "target_size": target.len(),
    });
    Ok(Report::new(json!({ "target_entangled": holds }), cert))
}

fn min_collection(a: &MinCollectionArgs) -> Res<Report> {
    let m = hypergraph::min_marginal_count(a.n, a.k)?;
    let cert = json!({ "connected": hypergraph::is_connected(&m.witness) });
    Ok(Report::new(json!({ "count": m.count, "collection": CollectionFile::from_collection(&m.witness) }), cert))
}

fn graph_bounds(a: &GraphBoundsArgs) -> Res<Report> {
    let g = read_json::<GraphFile>(&a.graph)?.parse()?;
    let b = graphstate::graph_bounds_with_budget(&g, a.budget)?;
    let uniformity = if g.n() <= 8 {
        Some(graphstate::uniformity_level(&graphstate::graph_state(&g)?)?)
    } else {
        None
    };
    // a k-uniform state cannot be determined by its k-body marginals
    let lo = uniformity.map_or(b.lo, |u| b.lo.max(u + 1));
    let result = json!({ "lo": b.lo, "hi": b.hi, "sdl_lo": lo, "exact": lo == b.hi });
    let cert = json!({
        "best_graph": GraphFile::from_graph(&b.best),
        "best_max_degree": b.best.max_degree(),
        "uniformity_level": uniformity,
    });
    let rep = Report::new(result, cert);
    Ok(rep.flag(if b.exact_orbit { "ORBIT_EXHAUSTED" } else { "ORBIT_BUDGET" }))
}

fn gap_demo(a: &GapDemoArgs) -> Res<Report> {
    match a.family {
        Family::Pure => {
            let nf = a.n as f64;
            let lower = (nf * nf - 2.0 * nf) / (nf * nf - 2.0 * nf + 1.0);
            let a2 = a.alpha2.unwrap_or((lower + 1.0) / 2.0);
            if !a2.is_finite() || a2 < 0.0 {
                return Err(CliError::input("BAD_AMPLITUDE", format!("alpha2 = {a2}")));
            }
            let g = symmetric::gap_pure_family(a.n, C64::new(a2.sqrt(), 0.0))?;
            let result = json!({ "edl": g.edl, "sdl": g.sdl, "gap": g.gap });
            let cert = json!({
                "alpha2": a2,
                "m0": matrix_rows(&g.m0),
                "m0_min_eigenvalue": g.m0_min_eigenvalue,
                "compatibility_deviation": g.compatibility_deviation,
                "compatible_state": StateFile::from_state(&State::Dense(g.sigma.clone())),
            });
            Ok(Report::new(result, cert))
        }
        Family::Mixed => {
            let lam = match &a.state {
                Some(p) => match load_state(p)? {
                    State::Diagonal { lambda, .. } => lambda,
                    other => {
                        return Err(CliError::input(
                            "UNSUPPORTED",
                            format!("mixed family needs a dicke_diagonal state, got {}", other.kind()),
                        ))
                    }
                },
                None => default_mixed(a.n)?,
            };
            if lam.n() != a.n {
                return Err(CliError::input("DIM_MISMATCH", format!("state has n = {}, expected {}", lam.n(), a.n)));
            }
            let g = symmetric::gap_mixed_family(&lam)?;
            let result = json!({ "edl": g.edl, "sdl": g.sdl, "gap": g.gap });
            let cert = json!({ "lambda": lam.lambda(), "quadratic_form": g.quadratic_form });
            Ok(Report::new(result, cert))
        }
    }
}

/// `eps |D^0> + (1 - 2 eps) |D^1> + eps |D^n>`, which has the required
/// negative two-body form once `eps` is small.
fn default_mixed(n: usize) -> Res<DickeMixture> {
    if n < 2 {
        return Err(CliError::input("BAD_LAMBDA", "n must be at least 2"));
    }
    let mut eps = 0.1;
    for _ in 0..40 {
        let mut l = vec![0.0; n + 1];
        l[0] = eps;
        l[1] = 1.0 - 2.0 * eps;
        l[n] = eps;
        let lam = DickeMixture::new(l)?;
        if symmetric::mixed_gap_form(&lam) < 0.0 {
            return Ok(lam);
        }
        eps /= 2.0;
    }
    Err(CliError::input("BAD_LAMBDA", "no default mixture found"))
}
