//! Small dense conic solver.
//!
//! Problems have Hermitian matrix variables, each either free or constrained
//! to the PSD cone, linear equality constraints and a linear objective to
//! minimize. The solver is over-relaxed ADMM alternating between the affine
//! set and the cone product, with residual balancing of the penalty.
//! Variables are stored as one real vector: a Hermitian `d x d` block uses
//! `d^2` coordinates (`d(d+1)/2` for real blocks), scaled so the Euclidean
//! inner product equals the Frobenius one.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::{self, c, hermitian_part, CMat};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Free,
    Psd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub dim: usize,
    /// Restricts the block to real symmetric matrices.
    pub real: bool,
}

impl BlockSpec {
    pub fn psd(dim: usize) -> Self {
        BlockSpec { kind: BlockKind::Psd, dim, real: false }
    }

    pub fn free(dim: usize) -> Self {
        BlockSpec { kind: BlockKind::Free, dim, real: false }
    }

    pub fn real(self) -> Self {
        BlockSpec { real: true, ..self }
    }

    pub fn coords(&self) -> usize {
        if self.real {
            self.dim * (self.dim + 1) / 2
        } else {
            self.dim * self.dim
        }
    }
}

/// Coordinate layout of a list of blocks.
#[derive(Clone, Debug)]
pub struct Layout {
    blocks: Vec<BlockSpec>,
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for b in &blocks {
            offsets.push(total);
            total += b.coords();
        }
        Layout { blocks, offsets, total }
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn total(&self) -> usize {
        self.total
    }

    fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b] + self.blocks[b].coords()
    }

    /// Writes the coordinates of the Hermitian part of `m` into block `b`.
    pub fn store(&self, b: usize, m: &CMat, x: &mut [f64]) {
        let spec = self.blocks[b];
        let out = &mut x[self.range(b)];
        let s2 = std::f64::consts::SQRT_2;
        let mut k = 0;
        for i in 0..spec.dim {
            out[k] = m[(i, i)].re;
            k += 1;
            for j in i + 1..spec.dim {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[k] = s2 * v.re;
                k += 1;
                if !spec.real {
                    out[k] = s2 * v.im;
                    k += 1;
                }
            }
        }
    }

    pub fn load(&self, b: usize, x: &[f64]) -> CMat {
        let spec = self.blocks[b];
        let v = &x[self.range(b)];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMat::zeros(spec.dim, spec.dim);
        let mut k = 0;
        for i in 0..spec.dim {
            m[(i, i)] = c(v[k], 0.0);
            k += 1;
            for j in i + 1..spec.dim {
                let re = v[k] * h;
                k += 1;
                let im = if spec.real {
                    0.0
                } else {
                    k += 1;
                    v[k - 1] * h
                };
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
        m
    }

    /// Stacked coordinates of a list of matrices, one per block.
    pub fn pack(&self, ms: &[CMat]) -> Vec<f64> {
        let mut x = vec![0.0; self.total];
        for (b, m) in ms.iter().enumerate() {
            self.store(b, m, &mut x);
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> Vec<CMat> {
        (0..self.blocks.len()).map(|b| self.load(b, x)).collect()
    }

    /// Projects every PSD block onto the cone; free blocks are untouched.
    pub fn project_cones(&self, x: &mut [f64]) {
        for b in 0..self.blocks.len() {
            if self.blocks[b].kind == BlockKind::Psd {
                let m = self.load(b, x);
                let p = psd_part(&m, self.blocks[b].real);
                self.store(b, &p, x);
            }
        }
    }
}

/// Nearest PSD matrix in Frobenius norm (eigenvalue clipping).
pub fn psd_part(m: &CMat, real: bool) -> CMat {
    if real {
        let r = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        let e = qcore::eigh(&r);
        let d = DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|v| v.max(0.0)));
        let p = &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose();
        p.map(|v| c(v, 0.0))
    } else {
        let e = qcore::eigh(m);
        let d = DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|v| c(v.max(0.0), 0.0)));
        &e.eigenvectors * CMat::from_diagonal(&d) * e.eigenvectors.adjoint()
    }
}

/// `sum_b <M_b, X_b> = rhs`, with `<A, X> = Re Tr(A X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, CMat)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    /// Minimized functional `sum_b <C_b, X_b>`.
    pub objective: Vec<(usize, CMat)>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::DimMismatch("problem has no variable blocks".into()));
        }
        let check = |terms: &[(usize, CMat)]| -> Result<()> {
            for (b, m) in terms {
                let spec = self.blocks.get(*b).ok_or_else(|| Error::DimMismatch(format!("no block {b}")))?;
                if m.nrows() != spec.dim || m.ncols() != spec.dim {
                    return Err(Error::DimMismatch(format!(
                        "block {b} is {0}x{0}, coefficient is {1}x{2}",
                        spec.dim,
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for con in &self.constraints {
            check(&con.terms)?;
        }
        Ok(())
    }

    fn functional(layout: &Layout, terms: &[(usize, CMat)]) -> Vec<f64> {
        let mut row = vec![0.0; layout.total()];
        let mut tmp = vec![0.0; layout.total()];
        for (b, m) in terms {
            layout.store(*b, &hermitian_part(m), &mut tmp);
            for i in layout.range(*b) {
                row[i] += tmp[i];
            }
        }
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective: f64,
    /// Cone-feasible iterate, one matrix per block.
    pub blocks: Vec<CMat>,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Euclidean projection onto the affine constraint set.
pub trait AffineProjector {
    fn project(&self, x: &mut [f64]);
}

/// Projection through an orthonormalized copy of the constraint rows.
pub struct DenseProjector {
    q: DMatrix<f64>,
    qb: DVector<f64>,
}

impl DenseProjector {
    /// Fails with `Infeasible` semantics (an `InvalidState` error) when the
    /// rows are inconsistent.
    pub fn new(rows: &[Vec<f64>], rhs: &[f64], dim: usize) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut qb: Vec<f64> = Vec::new();
        for (row, &b) in rows.iter().zip(rhs) {
            let norm0 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut a = row.clone();
            let mut bb = b;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (q, &qbv) in basis.iter().zip(&qb) {
                    let coef: f64 = q.iter().zip(&a).map(|(x, y)| x * y).sum();
                    a.iter_mut().zip(q).for_each(|(x, y)| *x -= coef * y);
                    bb -= coef * qbv;
                }
            }
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= 1e-10 * norm0.max(1.0) {
                if bb.abs() > 1e-9 * (1.0 + b.abs()) {
                    return Err(Error::InvalidState(format!("inconsistent equality constraints (residual {bb:.3e})")));
                }
                continue;
            }
            a.iter_mut().for_each(|v| *v /= norm);
            basis.push(a);
            qb.push(bb / norm);
        }
        let q = DMatrix::from_fn(basis.len(), dim, |i, j| basis[i][j]);
        Ok(DenseProjector { q, qb: DVector::from_vec(qb) })
    }

    pub fn rank(&self) -> usize {
        self.q.nrows()
    }
}

impl AffineProjector for DenseProjector {
    fn project(&self, x: &mut [f64]) {
        if self.q.nrows() == 0 {
            return;
        }
        let v = DVector::from_column_slice(x);
        let t = &self.q * &v - &self.qb;
        let corr = self.q.tr_mul(&t);
        x.iter_mut().zip(corr.iter()).for_each(|(a, b)| *a -= b);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    pub sigma: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, relaxation: 1.5, sigma: 1.0 }
    }
}

/// Raw ADMM state at exit.
#[derive(Clone, Debug)]
pub struct AdmmOutput {
    pub status: SdpStatus,
    /// Affine-feasible iterate.
    pub x: Vec<f64>,
    /// Cone-feasible iterate.
    pub z: Vec<f64>,
    /// Scaled dual; `sigma * u` is the cone multiplier (non-positive on PSD blocks).
    pub u: Vec<f64>,
    pub sigma: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `c.x` over the affine set of `proj` intersected with the cones
/// of `layout`. Starts from `start` when given.
pub fn admm(
    layout: &Layout,
    cost: &[f64],
    proj: &dyn AffineProjector,
    settings: &AdmmSettings,
    start: Option<&[f64]>,
) -> AdmmOutput {
    let nv = layout.total();
    assert_eq!(cost.len(), nv, "objective length does not match the layout");
    let alpha = settings.relaxation;
    let mut sigma = settings.sigma;
    let mut z = start.map(|s| s.to_vec()).unwrap_or_else(|| vec![0.0; nv]);
    let mut u = vec![0.0; nv];
    let mut x = vec![0.0; nv];
    let mut z_old = vec![0.0; nv];
    let cnorm = norm(cost);
    let mut checkpoint = f64::INFINITY;
    let mut residuals = Residuals { primal: f64::INFINITY, dual: f64::INFINITY, gap: f64::INFINITY };
    for it in 1..=settings.max_iter {
        for i in 0..nv {
            x[i] = z[i] - u[i] - cost[i] / sigma;
        }
        proj.project(&mut x);
        z_old.copy_from_slice(&z);
        for i in 0..nv {
            let xh = alpha * x[i] + (1.0 - alpha) * z_old[i];
            z[i] = xh + u[i];
        }
        layout.project_cones(&mut z);
        for i in 0..nv {
            let xh = alpha * x[i] + (1.0 - alpha) * z_old[i];
            u[i] += xh - z[i];
        }

        let rp = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let rd = sigma * z.iter().zip(&z_old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let eps_p = settings.tol * (1.0 + norm(&x).max(norm(&z)));
        let eps_d = settings.tol * (1.0 + cnorm.max(sigma * norm(&u)));
        residuals = Residuals { primal: rp, dual: rd, gap: (dot(cost, &x) - dot(cost, &z)).abs() };
        if rp <= eps_p && rd <= eps_d {
            return AdmmOutput { status: SdpStatus::Optimal, x, z, u, sigma, residuals, iterations: it };
        }
        if it % 25 == 0 {
            let (p, d) = (rp / eps_p, rd / eps_d);
            let scale = if p > 10.0 * d {
                2.0
            } else if d > 10.0 * p {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 && (1e-6..=1e6).contains(&(sigma * scale)) {
                sigma *= scale;
                u.iter_mut().for_each(|v| *v /= scale);
            }
        }
        if it % 1000 == 0 {
            // a primal gap that no longer shrinks means the sets do not meet
            if rp > 0.99 * checkpoint && rp > settings.tol.sqrt() * (1.0 + norm(&z)) {
                return AdmmOutput { status: SdpStatus::Infeasible, x, z, u, sigma, residuals, iterations: it };
            }
            checkpoint = rp;
        }
    }
    AdmmOutput { status: SdpStatus::MaxIter, x, z, u, sigma, residuals, iterations: settings.max_iter }
}

/// Solves a problem with the generic dense affine projector.
pub fn solve_sdp(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    p.validate()?;
    let layout = Layout::new(p.blocks.clone());
    let rows: Vec<Vec<f64>> = p.constraints.iter().map(|con| SdpProblem::functional(&layout, &con.terms)).collect();
    let rhs: Vec<f64> = p.constraints.iter().map(|con| con.rhs).collect();
    let cost = SdpProblem::functional(&layout, &p.objective);
    let proj = match DenseProjector::new(&rows, &rhs, layout.total()) {
        Ok(proj) => proj,
        Err(_) => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                objective: f64::NAN,
                blocks: layout.unpack(&vec![0.0; layout.total()]),
                residuals: Residuals { primal: f64::INFINITY, dual: f64::NAN, gap: f64::NAN },
                iterations: 0,
            })
        }
    };
    let settings = AdmmSettings { tol, max_iter, ..AdmmSettings::default() };
    let out = admm(&layout, &cost, &proj, &settings, None);
    Ok(SdpSolution {
        status: out.status,
        objective: dot(&cost, &out.z),
        blocks: layout.unpack(&out.z),
        residuals: out.residuals,
        iterations: out.iterations,
    })
}
