//! Semidefinite bounds on entanglement detection and state determination.
//!
//! * `fully_decomposable_alpha`: the smallest expectation `Tr(W rho)` over
//!   unit-trace witnesses that are sums of operators acting on the subsets of
//!   a collection and that split, for every bipartition `S|S'`, as
//!   `P_S + Q_S^{T_S}` with `P_S, Q_S` PSD. A negative value certifies genuine
//!   multipartite entanglement from those marginals alone.
//! * `pure_determination_alpha`: the smallest overlap `<psi|sigma|psi>` over
//!   states `sigma` sharing the marginals of `psi` on the collection.
//! * `symmetric_sdl_probe`: a randomized uniqueness test for symmetric states.
//!
//! Both structured problems run the generic ADMM loop from `sdp` with
//! closed-form affine projections built on the Pauli-string basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{all_k_subsets, SubsetCollection};
use crate::qcore::{self, c, check_dense_size, CMat, DenseState, PureVector, Subset, C64};
use crate::sdp::{self, AdmmSettings, BlockSpec, Constraint, Layout, SdpProblem, SdpStatus};
use crate::symmetric::{marginal_terms, SymmetricCoeffs};

/// Largest particle count accepted by the witness and determination programs.
pub const MAX_SDP_QUBITS: usize = 5;

fn check_sdp_size(n: usize) -> Result<()> {
    if n > MAX_SDP_QUBITS {
        Err(Error::TooLarge(n))
    } else {
        Ok(())
    }
}

fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im.abs() <= 1e-14)
}

// ---------------------------------------------------------------------------
// Pauli strings

/// A Pauli string as a signed permutation: row `r` has its single nonzero
/// entry `vals[r]` in column `r ^ flip`.
#[derive(Clone, Debug)]
struct SparsePauli {
    label: String,
    support: u64,
    flip: usize,
    vals: Vec<C64>,
}

impl SparsePauli {
    fn new(n: usize, label: &str) -> Self {
        let chars: Vec<char> = label.chars().collect();
        let dim = 1usize << n;
        let mut flip = 0;
        let mut support = 0u64;
        for (j, &ch) in chars.iter().enumerate() {
            if ch != 'I' {
                support |= 1 << j;
            }
            if ch == 'X' || ch == 'Y' {
                flip |= 1 << (n - 1 - j);
            }
        }
        let vals = (0..dim)
            .map(|r| {
                let mut v = c(1.0, 0.0);
                for (j, &ch) in chars.iter().enumerate() {
                    let bit = (r >> (n - 1 - j)) & 1;
                    match ch {
                        'Z' if bit == 1 => v = -v,
                        'Y' => v *= if bit == 0 { c(0.0, -1.0) } else { c(0.0, 1.0) },
                        _ => {}
                    }
                }
                v
            })
            .collect();
        SparsePauli { label: label.to_string(), support, flip, vals }
    }

    /// `Re Tr(P m)`.
    fn trace_with(&self, m: &CMat) -> f64 {
        self.vals
            .iter()
            .enumerate()
            .map(|(r, v)| (v * m[(r ^ self.flip, r)]).re)
            .sum()
    }

    fn add_to(&self, m: &mut CMat, coef: f64) {
        for (r, v) in self.vals.iter().enumerate() {
            m[(r, r ^ self.flip)] += v * coef;
        }
    }

    fn y_count(&self) -> usize {
        self.label.chars().filter(|&ch| ch == 'Y').count()
    }
}

fn all_labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| ['I', 'X', 'Y', 'Z'].map(|ch| format!("{s}{ch}")))
            .collect();
    }
    out
}

/// Orthogonal basis of the operators supported inside some subset of a
/// collection, identity excluded.
#[derive(Clone, Debug)]
struct PauliSpan {
    n: usize,
    terms: Vec<SparsePauli>,
}

impl PauliSpan {
    fn new(c: &SubsetCollection, real: bool) -> Self {
        let n = c.n();
        let terms = all_labels(n)
            .iter()
            .map(|l| SparsePauli::new(n, l))
            .filter(|p| p.support != 0)
            .filter(|p| !real || p.y_count() % 2 == 0)
            .filter(|p| c.edges().iter().any(|s| p.support & !s.mask() == 0))
            .collect();
        PauliSpan { n, terms }
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    fn coefficients(&self, m: &CMat) -> Vec<f64> {
        let d = self.dim() as f64;
        self.terms.iter().map(|p| p.trace_with(m) / d).collect()
    }

    fn combine(&self, identity: f64, coefs: &[f64]) -> CMat {
        let d = self.dim();
        let mut m = CMat::identity(d, d) * c(identity, 0.0);
        for (p, &w) in self.terms.iter().zip(coefs) {
            if w != 0.0 {
                p.add_to(&mut m, w);
            }
        }
        m
    }

    /// Orthogonal projection onto the span with the identity included.
    fn project(&self, m: &CMat) -> CMat {
        let id = m.trace().re / self.dim() as f64;
        self.combine(id, &self.coefficients(m))
    }
}

/// Places `h`, acting on the particles of `s` in ascending order, into the
/// full space as `h (x) I`.
pub fn embed(n: usize, s: &Subset, h: &CMat) -> Result<CMat> {
    let k = s.len();
    if h.nrows() != 1 << k || h.ncols() != 1 << k || s.n() != n {
        return Err(Error::DimMismatch(format!("block of size {} on {k} particles", h.nrows())));
    }
    let parts = s.indices();
    let local = |idx: usize| parts.iter().fold(0usize, |acc, &p| (acc << 1) | ((idx >> (n - p)) & 1));
    let smask = s.index_mask();
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            if r & !smask == col & !smask {
                out[(r, col)] = h[(local(r), local(col))];
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// witnesses

/// Nontrivial bipartitions `S|S'` with particle 1 in `S`, by ascending mask.
pub fn bipartitions(n: usize) -> Vec<Subset> {
    let full = Subset::full(n).mask();
    (1..full).filter(|m| m & 1 == 1).map(|m| Subset::new(n, m).expect("mask within range")).collect()
}

/// Decomposition `W = P + Q^{T_S}` for one bipartition.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub s: Subset,
    pub p: CMat,
    pub q: CMat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    n: usize,
    blocks: Vec<(Subset, CMat)>,
    matrix: CMat,
    pub certificates: Vec<Certificate>,
}

impl Witness {
    /// Assembles `W = sum_S H^S (x) I` from local blocks.
    pub fn from_blocks(n: usize, blocks: Vec<(Subset, CMat)>) -> Result<Self> {
        check_dense_size(n)?;
        let dim = 1usize << n;
        let mut matrix = CMat::zeros(dim, dim);
        for (s, h) in &blocks {
            matrix += embed(n, s, h)?;
        }
        Ok(Witness { n, blocks, matrix, certificates: Vec::new() })
    }

    /// Splits a witness that is local with respect to `c` into blocks. Each
    /// Pauli component goes to the first subset containing its support; the
    /// identity component goes to the first subset.
    pub fn from_matrix(w: &CMat, col: &SubsetCollection) -> Result<Self> {
        let n = col.n();
        check_dense_size(n)?;
        if w.nrows() != 1 << n || w.ncols() != 1 << n {
            return Err(Error::DimMismatch(format!("witness must be {0}x{0}", 1usize << n)));
        }
        let span = PauliSpan::new(col, false);
        let coefs = span.coefficients(w);
        let mut blocks: Vec<(Subset, CMat)> = col
            .edges()
            .iter()
            .map(|s| (*s, CMat::zeros(1 << s.len(), 1 << s.len())))
            .collect();
        let id = w.trace().re / (1usize << n) as f64;
        let d0 = blocks[0].1.nrows();
        blocks[0].1 += CMat::identity(d0, d0) * c(id, 0.0);
        for (p, &wgt) in span.terms.iter().zip(&coefs) {
            if wgt.abs() < 1e-15 {
                continue;
            }
            let bi = col.edges().iter().position(|s| p.support & !s.mask() == 0).expect("span term lies in some subset");
            let s = blocks[bi].0;
            let restricted: String = s.indices().iter().map(|&j| p.label.as_bytes()[j - 1] as char).collect();
            blocks[bi].1 += qcore::pauli_string(s.len(), &restricted)? * c(wgt, 0.0);
        }
        let mut out = Witness::from_blocks(n, blocks)?;
        // keep the caller's matrix, which may carry non-local noise that
        // verification should see
        out.matrix = w.clone();
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[(Subset, CMat)] {
        &self.blocks
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn expectation(&self, rho: &DenseState) -> f64 {
        qcore::trace_product(&self.matrix, rho.matrix()).re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartitionCheck {
    pub s: Subset,
    pub residual: f64,
    pub min_eig_p: f64,
    pub min_eig_q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessVerdict {
    pub valid: bool,
    pub trace: f64,
    pub locality_deviation: f64,
    pub expectation: f64,
    pub checks: Vec<BipartitionCheck>,
    pub failures: Vec<String>,
}

fn subset_label(s: &Subset) -> String {
    let idx: Vec<String> = s.indices().iter().map(|j| j.to_string()).collect();
    format!("{{{}}}", idx.join(","))
}

/// Checks normalization (`tol`), locality (`tol`), and every bipartition
/// certificate (decomposition residual `10 tol`, eigenvalues `>= -tol`).
pub fn verify_witness(w: &Witness, rho: &DenseState, tol: f64) -> Result<WitnessVerdict> {
    if rho.n() != w.n {
        return Err(Error::DimMismatch(format!("witness on {} qubits, state on {}", w.n, rho.n())));
    }
    let mut failures = Vec::new();
    let trace = w.matrix.trace().re;
    if (trace - 1.0).abs() > tol {
        failures.push(format!("trace {trace} differs from 1"));
    }
    let mut rebuilt = CMat::zeros(w.matrix.nrows(), w.matrix.ncols());
    for (s, h) in &w.blocks {
        rebuilt += embed(w.n, s, h)?;
    }
    let locality_deviation = qcore::max_abs_diff(&rebuilt, &w.matrix);
    if locality_deviation > tol {
        failures.push(format!("matrix deviates from its local blocks by {locality_deviation:.3e}"));
    }
    let mut checks = Vec::new();
    for s in bipartitions(w.n) {
        let Some(cert) = w.certificates.iter().find(|ct| ct.s == s || ct.s == s.complement()) else {
            failures.push(format!("no certificate for bipartition {}", subset_label(&s)));
            continue;
        };
        let qt = qcore::partial_transpose(&cert.q, &cert.s)?;
        let residual = qcore::max_abs_diff(&w.matrix, &(&cert.p + qt));
        let min_eig_p = qcore::min_eigenvalue(&qcore::hermitian_part(&cert.p))?;
        let min_eig_q = qcore::min_eigenvalue(&qcore::hermitian_part(&cert.q))?;
        let name = subset_label(&cert.s);
        if residual > 10.0 * tol {
            failures.push(format!("bipartition {name}: decomposition residual {residual:.3e}"));
        }
        if min_eig_p < -tol {
            failures.push(format!("bipartition {name}: P has eigenvalue {min_eig_p:.3e}"));
        }
        if min_eig_q < -tol {
            failures.push(format!("bipartition {name}: Q has eigenvalue {min_eig_q:.3e}"));
        }
        checks.push(BipartitionCheck { s, residual, min_eig_p, min_eig_q });
    }
    Ok(WitnessVerdict {
        valid: failures.is_empty(),
        trace,
        locality_deviation,
        expectation: w.expectation(rho),
        checks,
        failures,
    })
}

/// Finds a decomposition `W = P + Q^{T_S}` for every bipartition by
/// maximizing `t` subject to `P + Q^{T_S} + t I = W`. The returned `Q` is
/// PSD and `P = W - Q^{T_S}` is exact, so a negative optimum shows up as a
/// negative eigenvalue of `P`.
pub fn fit_certificates(w: &CMat, n: usize, tol: f64) -> Result<Vec<Certificate>> {
    check_sdp_size(n)?;
    let dim = 1usize << n;
    if w.nrows() != dim || w.ncols() != dim {
        return Err(Error::DimMismatch(format!("witness must be {dim}x{dim}")));
    }
    let real = is_real(w);
    let labels: Vec<CMat> = all_labels(n)
        .iter()
        .filter(|l| !real || l.chars().filter(|&ch| ch == 'Y').count() % 2 == 0)
        .map(|l| qcore::pauli_string(n, l))
        .collect::<Result<_>>()?;
    let spec = |b: BlockSpec| if real { b.real() } else { b };
    let mut out = Vec::new();
    for s in bipartitions(n) {
        let constraints = labels
            .iter()
            .map(|pm| {
                let pt = qcore::partial_transpose(pm, &s)?;
                Ok(Constraint {
                    terms: vec![(0, pm.clone()), (1, pt), (2, CMat::identity(1, 1) * pm.trace())],
                    rhs: qcore::trace_product(pm, w).re,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let problem = SdpProblem {
            blocks: vec![spec(BlockSpec::psd(dim)), spec(BlockSpec::psd(dim)), spec(BlockSpec::free(1))],
            objective: vec![(2, -CMat::identity(1, 1))],
            constraints,
        };
        let sol = sdp::solve_sdp(&problem, tol, sdp::DEFAULT_MAX_ITER)?;
        if sol.status == SdpStatus::Infeasible {
            return Err(Error::SolverFail(format!("certificate program for {} reported infeasible", subset_label(&s))));
        }
        let q = sol.blocks[1].clone();
        let p = w - qcore::partial_transpose(&q, &s)?;
        out.push(Certificate { s, p, q });
    }
    Ok(out)
}

/// Closed-form projection onto `{W local, Tr W = 1, P_b + T_b(Q_b) = W}`.
struct WitnessProjector {
    layout: Layout,
    span: PauliSpan,
    bips: Vec<Subset>,
}

impl WitnessProjector {
    fn local_unit_trace(&self, m: &CMat) -> CMat {
        self.span.combine(1.0 / self.span.dim() as f64, &self.span.coefficients(m))
    }
}

fn transpose_part(m: &CMat, s: &Subset) -> CMat {
    qcore::partial_transpose(m, s).expect("dimensions fixed by the layout")
}

impl sdp::AffineProjector for WitnessProjector {
    fn project(&self, x: &mut [f64]) {
        let nb = self.bips.len();
        let w0 = self.layout.load(0, x);
        let mut ms = Vec::with_capacity(nb);
        let mut p0s = Vec::with_capacity(nb);
        let mut r0s = Vec::with_capacity(nb);
        let mut acc = w0;
        for (b, s) in self.bips.iter().enumerate() {
            let p0 = self.layout.load(1 + 2 * b, x);
            let r0 = transpose_part(&self.layout.load(2 + 2 * b, x), s);
            let m = &p0 + &r0;
            acc += &m * c(0.5, 0.0);
            ms.push(m);
            p0s.push(p0);
            r0s.push(r0);
        }
        let w = self.local_unit_trace(&(acc / c(1.0 + nb as f64 / 2.0, 0.0)));
        self.layout.store(0, &w, x);
        for (b, s) in self.bips.iter().enumerate() {
            let half = (&w - &ms[b]) * c(0.5, 0.0);
            let p = &p0s[b] + &half;
            let q = transpose_part(&(&r0s[b] + &half), s);
            self.layout.store(1 + 2 * b, &p, x);
            self.layout.store(2 + 2 * b, &q, x);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaResult {
    pub alpha: f64,
    pub witness: Witness,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Identity weight added to make the raw solver output exactly decomposable.
    pub repair_shift: f64,
}

/// `alpha(rho, c)`: minimum of `Tr(W rho)` over fully decomposable witnesses
/// local with respect to `c`. The witness returned is always exactly
/// decomposable, so `alpha` is an upper bound on the true optimum that is
/// tight to solver accuracy.
pub fn fully_decomposable(rho: &DenseState, col: &SubsetCollection, tol: f64) -> Result<AlphaResult> {
    let n = rho.n();
    check_sdp_size(n)?;
    if col.n() != n {
        return Err(Error::DimMismatch(format!("collection over {} particles, state over {n}", col.n())));
    }
    if n < 2 {
        return Err(Error::TooLarge(n));
    }
    let dim = 1usize << n;
    let real = is_real(rho.matrix());
    let spec = |b: BlockSpec| if real { b.real() } else { b };
    let bips = bipartitions(n);
    let mut blocks = vec![spec(BlockSpec::free(dim))];
    for _ in &bips {
        blocks.push(spec(BlockSpec::psd(dim)));
        blocks.push(spec(BlockSpec::psd(dim)));
    }
    let layout = Layout::new(blocks);
    let proj = WitnessProjector { layout: layout.clone(), span: PauliSpan::new(col, real), bips: bips.clone() };

    let mut cost = vec![0.0; layout.total()];
    layout.store(0, rho.matrix(), &mut cost);
    let unit = CMat::identity(dim, dim) * c(1.0 / dim as f64, 0.0);
    let mut start_blocks = vec![unit.clone()];
    for _ in &bips {
        start_blocks.push(unit.clone());
        start_blocks.push(CMat::zeros(dim, dim));
    }
    let start = layout.pack(&start_blocks);
    let settings = AdmmSettings { tol, ..AdmmSettings::default() };
    let out = sdp::admm(&layout, &cost, &proj, &settings, Some(&start));
    if out.status == SdpStatus::Infeasible {
        return Err(Error::SolverFail("witness program reported infeasible".into()));
    }

    // exact repair: keep the PSD Q blocks, recompute P, then mix in identity
    let w = proj.local_unit_trace(&layout.load(0, &out.x));
    let mut certs = Vec::with_capacity(bips.len());
    let mut worst: f64 = 0.0;
    for (b, s) in bips.iter().enumerate() {
        let q = layout.load(2 + 2 * b, &out.z);
        let p = &w - transpose_part(&q, s);
        worst = worst.min(qcore::min_eigenvalue(&p)?);
        certs.push(Certificate { s: *s, p, q });
    }
    let eps = -worst;
    let scale = 1.0 + eps * dim as f64;
    let id = CMat::identity(dim, dim);
    let w = (&w + &id * c(eps, 0.0)) / c(scale, 0.0);
    for ct in certs.iter_mut() {
        ct.p = (&ct.p + &id * c(eps, 0.0)) / c(scale, 0.0);
        ct.q /= c(scale, 0.0);
    }
    let mut witness = Witness::from_matrix(&w, col)?;
    witness.certificates = certs;
    Ok(AlphaResult {
        alpha: witness.expectation(rho),
        witness,
        status: out.status,
        iterations: out.iterations,
        repair_shift: eps,
    })
}

/// `(alpha, W)`; see `fully_decomposable`.
pub fn fully_decomposable_alpha(rho: &DenseState, col: &SubsetCollection, tol: f64) -> Result<(f64, Witness)> {
    let r = fully_decomposable(rho, col, tol)?;
    Ok((r.alpha, r.witness))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdlBound {
    /// Smallest level whose witness program certifies entanglement.
    pub level: Option<usize>,
    /// `(k, alpha(rho, S_k))` for every level scanned.
    pub alphas: Vec<(usize, f64)>,
    pub witness: Option<Witness>,
}

/// Scans `k = 2..=n` for the first `alpha(rho, S_k) < -10 tol`.
pub fn edl_upper_bound(rho: &DenseState, tol: f64) -> Result<EdlBound> {
    let n = rho.n();
    check_sdp_size(n)?;
    let mut alphas = Vec::new();
    for k in 2..=n {
        let r = fully_decomposable(rho, &all_k_subsets(n, k)?, tol)?;
        alphas.push((k, r.alpha));
        if r.alpha < -10.0 * tol {
            return Ok(EdlBound { level: Some(k), alphas, witness: Some(r.witness) });
        }
    }
    Ok(EdlBound { level: None, alphas, witness: None })
}

/// White-noise level `p* = 2^n alpha / (2^n alpha - 1)` at which `Tr(W rho_p)` vanishes.
pub fn noise_threshold(alpha: f64, n: usize) -> Result<f64> {
    if alpha >= 0.0 || alpha.is_nan() {
        return Err(Error::NotNegative(alpha));
    }
    let a = (1u64 << n) as f64 * alpha;
    Ok(a / (a - 1.0))
}

// ---------------------------------------------------------------------------
// pure-state determination

/// Replaces the span components of a state by those of the target.
struct MarginalProjector {
    layout: Layout,
    span: PauliSpan,
    target: CMat,
}

impl sdp::AffineProjector for MarginalProjector {
    fn project(&self, x: &mut [f64]) {
        let m = self.layout.load(0, x);
        let out = &m - self.span.project(&m) + &self.target;
        self.layout.store(0, &out, x);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Determination {
    /// Overlap `<psi|sigma|psi>` at the solver's affine-feasible iterate, in `[0, 1]`.
    pub alpha: f64,
    /// Rigorous lower bound from the dual multiplier.
    pub lower_bound: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

/// Minimizes `<psi|sigma|psi>` over states `sigma` whose marginals on `c`
/// match those of `psi`.
pub fn pure_determination(psi: &PureVector, col: &SubsetCollection, tol: f64) -> Result<Determination> {
    let n = psi.n();
    check_sdp_size(n)?;
    if col.n() != n {
        return Err(Error::DimMismatch(format!("collection over {} particles, state over {n}", col.n())));
    }
    let dim = 1usize << n;
    let target_state = psi.density();
    let cmat = target_state.matrix().clone();
    let real = is_real(&cmat);
    let spec = if real { BlockSpec::psd(dim).real() } else { BlockSpec::psd(dim) };
    let layout = Layout::new(vec![spec]);
    let span = PauliSpan::new(col, real);
    let target = span.project(&cmat);
    let proj = MarginalProjector { layout: layout.clone(), span, target };
    let cost = layout.pack(&[cmat.clone()]);
    let start = layout.pack(&[CMat::identity(dim, dim) * c(1.0 / dim as f64, 0.0)]);
    let settings = AdmmSettings { tol, ..AdmmSettings::default() };
    let out = sdp::admm(&layout, &cost, &proj, &settings, Some(&start));
    if out.status == SdpStatus::Infeasible {
        return Err(Error::SolverFail("determination program reported infeasible".into()));
    }
    let x = layout.load(0, &out.x);
    let alpha = qcore::trace_product(&cmat, &x).re.clamp(0.0, 1.0);

    let u = layout.load(0, &out.u);
    let g = proj.span.project(&(&cmat + u * c(out.sigma, 0.0)));
    let lower_bound = qcore::trace_product(&g, &cmat).re + qcore::min_eigenvalue(&(&cmat - &g))?;
    Ok(Determination { alpha, lower_bound: lower_bound.min(1.0), status: out.status, iterations: out.iterations })
}

pub fn pure_determination_alpha(psi: &PureVector, col: &SubsetCollection, tol: f64) -> Result<f64> {
    let r = pure_determination(psi, col, tol)?;
    if r.status == SdpStatus::MaxIter && r.alpha - r.lower_bound > 1e3 * tol {
        return Err(Error::SolverFail(format!(
            "determination program stalled with overlap in [{:.6}, {:.6}]",
            r.lower_bound, r.alpha
        )));
    }
    Ok(r.alpha)
}

/// Smallest `k` whose k-body marginals determine `psi`: `alpha >= 1 - 100 tol`.
pub fn sdl_pure(psi: &PureVector, tol: f64) -> Result<usize> {
    let n = psi.n();
    check_sdp_size(n)?;
    for k in 1..n {
        if pure_determination_alpha(psi, &all_k_subsets(n, k)?, tol)? >= 1.0 - 100.0 * tol {
            return Ok(k);
        }
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
// symmetric uniqueness probe

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeVerdict {
    pub unique: bool,
    /// Largest deviation of an optimized functional from its value at the input.
    pub max_deviation: f64,
    pub trials: usize,
    /// Solves that hit the iteration limit and were discarded.
    pub stalled: usize,
    /// Always true: a `unique` verdict is numerical evidence, not a proof.
    pub numerical: bool,
}

/// Optimizes random linear functionals over symmetric states sharing the
/// k-body marginal of `a`; any optimum away from the functional's value at
/// `a` by more than `100 tol` (and by more than ten times the square root of
/// the primal residual) shows non-uniqueness. Seeded, deterministic.
pub fn symmetric_sdl_probe(a: &SymmetricCoeffs, k: usize, trials: usize, tol: f64) -> Result<ProbeVerdict> {
    let n = a.n();
    if k < 2 || k > n {
        return Err(Error::BadLevel { n, level: k });
    }
    let d = n + 1;
    let terms = marginal_terms(n, k);
    let mut target = CMat::zeros(k + 1, k + 1);
    for &(i, j, s, t, w) in &terms {
        target[(s, t)] += a.matrix()[(i, j)] * w;
    }
    // b[s][t] = sum w a[i][j] = Tr(F a) with F[j][i] = w
    let mut constraints = Vec::new();
    for s in 0..=k {
        for t in s..=k {
            let mut f = CMat::zeros(d, d);
            for &(i, j, ss, tt, w) in &terms {
                if (ss, tt) == (s, t) {
                    f[(j, i)] += c(w, 0.0);
                }
            }
            constraints.push(Constraint { terms: vec![(0, f.clone())], rhs: target[(s, t)].re });
            if s != t {
                constraints.push(Constraint { terms: vec![(0, f * c(0.0, -1.0))], rhs: target[(s, t)].im });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ ((n as u64) << 8) ^ k as u64);
    let mut max_dev: f64 = 0.0;
    let mut stalled = 0;
    for trial in 0..trials {
        let g = CMat::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = qcore::hermitian_part(&g);
        let at_a = qcore::trace_product(&h, a.matrix()).re;
        for sign in [1.0, -1.0] {
            let p = SdpProblem {
                blocks: vec![BlockSpec::psd(d)],
                objective: vec![(0, &h * c(sign, 0.0))],
                constraints: constraints.clone(),
            };
            let sol = sdp::solve_sdp(&p, tol, sdp::DEFAULT_MAX_ITER)?;
            if sol.status == SdpStatus::Infeasible {
                return Err(Error::SolverFail("probe program reported infeasible".into()));
            }
            // A unique point is a tangential intersection of the affine set
            // and the cone, where convergence is sublinear; stalled solves are
            // not evidence either way.
            if sol.status != SdpStatus::Optimal {
                stalled += 1;
                continue;
            }
            let dev = (sign * sol.objective - at_a).abs();
            max_dev = max_dev.max(dev);
            if dev > (100.0 * tol).max(10.0 * sol.residuals.primal.sqrt()) {
                return Ok(ProbeVerdict { unique: false, max_deviation: max_dev, trials: trial + 1, stalled, numerical: true });
            }
        }
    }
    Ok(ProbeVerdict { unique: true, max_deviation: max_dev, trials, stalled, numerical: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric::DickeMixture;

    const TOL: f64 = 1e-7;

    #[test]
    fn sparse_paulis_match_dense() {
        for label in ["XYZ", "IYI", "ZZI", "YYX", "III"] {
            let sp = SparsePauli::new(3, label);
            let mut m = CMat::zeros(8, 8);
            sp.add_to(&mut m, 1.0);
            assert_eq!(m, qcore::pauli_string(3, label).unwrap(), "{label}");
        }
    }

    #[test]
    fn span_projection_is_idempotent_and_local() {
        let col = all_k_subsets(3, 2).unwrap();
        let span = PauliSpan::new(&col, false);
        assert_eq!(span.terms.len(), 3 * 3 + 3 * 9);
        let g = CMat::from_fn(8, 8, |i, j| c((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1));
        let h = qcore::hermitian_part(&g);
        let p = span.project(&h);
        assert!(qcore::max_abs_diff(&p, &span.project(&p)) < 1e-12);
        let xyz = qcore::pauli_string(3, "XYZ").unwrap();
        assert!(qcore::trace_product(&xyz, &p).norm() < 1e-12);
    }

    #[test]
    fn embedding_matches_kron() {
        let h = qcore::pauli_string(2, "XZ").unwrap();
        let s = Subset::from_indices(3, &[1, 3]).unwrap();
        let e = embed(3, &s, &h).unwrap();
        assert_eq!(e, qcore::pauli_string(3, "XIZ").unwrap());
    }

    #[test]
    fn bipartition_count() {
        for n in 2..6 {
            let b = bipartitions(n);
            assert_eq!(b.len(), (1 << (n - 1)) - 1);
            assert!(b.iter().all(|s| s.contains(1) && s.len() < n));
        }
    }

    #[test]
    fn maximally_mixed_has_positive_alpha() {
        for n in 2..4 {
            let rho = DenseState::maximally_mixed(n).unwrap();
            let (alpha, w) = fully_decomposable_alpha(&rho, &all_k_subsets(n, 2).unwrap(), TOL).unwrap();
            assert!((alpha - 1.0 / (1 << n) as f64).abs() < 1e-9);
            assert!(verify_witness(&w, &rho, TOL).unwrap().valid);
        }
    }

    #[test]
    fn ghz3_needs_full_marginal() {
        let ghz = PureVector::ghz(3).unwrap().density();
        let (a2, w2) = fully_decomposable_alpha(&ghz, &all_k_subsets(3, 2).unwrap(), TOL).unwrap();
        assert!(a2 >= -1e-6, "{a2}");
        assert!(verify_witness(&w2, &ghz, TOL).unwrap().valid);
        let r = edl_upper_bound(&ghz, TOL).unwrap();
        assert_eq!(r.level, Some(3));
        let w = r.witness.unwrap();
        let v = verify_witness(&w, &ghz, TOL).unwrap();
        assert!(v.valid, "{:?}", v.failures);
        assert!(v.expectation < 0.0);
    }

    #[test]
    fn witness_is_nonnegative_on_product_states() {
        use rand::{Rng, SeedableRng};
        let ghz = PureVector::ghz(3).unwrap().density();
        let (_, w) = fully_decomposable_alpha(&ghz, &all_k_subsets(3, 3).unwrap(), TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let mut v = CMat::identity(1, 1);
            for _ in 0..3 {
                let q = CMat::from_fn(2, 1, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                let q = &q / c(q.norm(), 0.0);
                v = qcore::kron(&v, &q);
            }
            let rho = DenseState::from_matrix(3, &v * v.adjoint()).unwrap();
            assert!(w.expectation(&rho) >= -1e-6);
        }
    }

    #[test]
    fn alpha_monotone_in_collection() {
        let rho = crate::oracle::dense_from_diagonal(&DickeMixture::new(vec![0.0, 0.5, 0.5, 0.0]).unwrap()).unwrap();
        let small = SubsetCollection::from_index_lists(3, &[vec![1, 2], vec![2, 3]]).unwrap();
        let big = all_k_subsets(3, 2).unwrap();
        let a_small = fully_decomposable_alpha(&rho, &small, TOL).unwrap().0;
        let a_big = fully_decomposable_alpha(&rho, &big, TOL).unwrap().0;
        assert!(a_big <= a_small + 1e-6, "{a_big} {a_small}");
    }

    #[test]
    fn noise_thresholds() {
        for n in 2..6 {
            let a = -1.0 / (1u64 << n) as f64;
            assert!((noise_threshold(a, n).unwrap() - 0.5).abs() < 1e-15);
        }
        assert_eq!(noise_threshold(0.0, 3), Err(Error::NotNegative(0.0)));
    }

    #[test]
    fn broken_certificate_is_named() {
        let ghz = PureVector::ghz(3).unwrap().density();
        let (_, mut w) = fully_decomposable_alpha(&ghz, &all_k_subsets(3, 3).unwrap(), TOL).unwrap();
        let idx = w.certificates.iter().position(|ct| ct.s.mask() == 0b011).unwrap();
        w.certificates[idx].p = -w.certificates[idx].p.clone();
        let v = verify_witness(&w, &ghz, TOL).unwrap();
        assert!(!v.valid);
        assert!(v.failures.iter().any(|f| f.contains("{1,2}")), "{:?}", v.failures);
    }

    #[test]
    fn trivial_witness_verifies_after_fitting() {
        let n = 3;
        let rho = DenseState::maximally_mixed(n).unwrap();
        let id = CMat::identity(8, 8) * c(0.125, 0.0);
        let mut w = Witness::from_matrix(&id, &all_k_subsets(n, 1).unwrap()).unwrap();
        w.certificates = fit_certificates(&id, n, TOL).unwrap();
        let v = verify_witness(&w, &rho, TOL).unwrap();
        assert!(v.valid, "{:?}", v.failures);
        assert!((v.expectation - 0.125).abs() < 1e-12);
    }

    #[test]
    fn determination_with_full_collection() {
        let psi = PureVector::ghz(3).unwrap();
        let full = SubsetCollection::new(3, vec![Subset::full(3)]).unwrap();
        assert!((pure_determination_alpha(&psi, &full, TOL).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_marginals_admit_orthogonal_state() {
        // GHZ- shares every proper marginal with GHZ+
        let psi = PureVector::ghz(3).unwrap();
        let r = pure_determination(&psi, &all_k_subsets(3, 2).unwrap(), TOL).unwrap();
        assert!(r.alpha < 1e-5, "{r:?}");
        assert!(r.lower_bound <= r.alpha + 1e-9);
        assert_eq!(sdl_pure(&psi, TOL).unwrap(), 3);
    }

    #[test]
    fn dicke_state_determined_by_two_body_marginals() {
        let psi = crate::symmetric::dicke_vector(4, 2).unwrap();
        let r = pure_determination(&psi, &all_k_subsets(4, 2).unwrap(), TOL).unwrap();
        assert!(r.alpha > 1.0 - 1e-5, "{r:?}");
        assert!(r.lower_bound > 1.0 - 1e-3, "{r:?}");
        assert_eq!(sdl_pure(&psi, TOL).unwrap(), 2);
    }

    #[test]
    fn product_state_has_sdl_one() {
        assert_eq!(sdl_pure(&PureVector::basis(3, 0b010).unwrap(), TOL).unwrap(), 1);
    }

    #[test]
    fn probe_examples() {
        for n in 3..5 {
            let mut g = vec![0.0; n + 1];
            g[0] = 0.5;
            g[n] = 0.5;
            let a = DickeMixture::new(g).unwrap().to_coeffs();
            assert!(!symmetric_sdl_probe(&a, n - 1, 5, TOL).unwrap().unique);
            let d = DickeMixture::dicke(n, 1).unwrap().to_coeffs();
            assert!(symmetric_sdl_probe(&d, 2, 3, TOL).unwrap().unique);
        }
        let a = DickeMixture::dicke(3, 1).unwrap().to_coeffs();
        assert!(symmetric_sdl_probe(&a, 1, 1, TOL).is_err());
    }

    fn published_witness(xy: f64, zz: f64) -> CMat {
        let p = |l: &str| qcore::pauli_string(3, l).unwrap();
        p("III") * c(0.125, 0.0) - (p("XXI") + p("IXX") + p("YYI") + p("IYY")) * c(xy, 0.0)
            - (p("ZZI") + p("IZZ")) * c(zz, 0.0)
    }

    #[test]
    fn published_witness_refits_and_detects() {
        let rho = crate::oracle::dense_from_diagonal(&DickeMixture::new(vec![0.0, 0.5, 0.5, 0.0]).unwrap()).unwrap();
        // 1/18 and 1/72 round to the printed 0.0556 and 0.0139
        let wm = published_witness(1.0 / 18.0, 1.0 / 72.0);
        let col = SubsetCollection::from_index_lists(3, &[vec![1, 2], vec![2, 3]]).unwrap();
        let mut w = Witness::from_matrix(&wm, &col).unwrap();
        w.certificates = fit_certificates(&wm, 3, 1e-10).unwrap();
        let v = verify_witness(&w, &rho, TOL).unwrap();
        assert!(v.valid, "{:?}", v.failures);
        assert!(v.expectation < 0.0);

        // the rounded coefficients miss decomposability by 1e-4
        let rounded = published_witness(0.0556, 0.0139);
        let worst = fit_certificates(&rounded, 3, 1e-10)
            .unwrap()
            .iter()
            .map(|ct| qcore::min_eigenvalue(&ct.p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((worst + 1e-4).abs() < 1e-6, "{worst}");
        let (alpha, _) = fully_decomposable_alpha(&rho, &all_k_subsets(3, 2).unwrap(), TOL).unwrap();
        assert!(alpha <= v.expectation + 1e-4, "{alpha} {}", v.expectation);
    }
}
