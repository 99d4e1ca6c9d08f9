//! Dense complex linear algebra for multi-qubit systems.
//!
//! Basis convention: the computational basis index of the bitstring
//! `s_1 s_2 ... s_n` is `sum_j s_j 2^(n-j)`, so particle 1 is the most
//! significant bit and the Hamming weight of an index equals its Dicke
//! weight. Particles are 1-based everywhere in the public API.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest particle count accepted by the dense representation.
pub const MAX_DENSE_QUBITS: usize = 10;
/// Tolerance for structural checks (Hermiticity, trace, norms).
pub const STRUCT_TOL: f64 = 1e-10;
/// Slack allowed on the smallest eigenvalue of a positive semidefinite matrix.
pub const PSD_TOL: f64 = 1e-9;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Symmetric/Hermitian eigendecomposition that never returns non-finite values.
///
/// nalgebra's implicit QR can overflow to inf/NaN on some exactly structured
/// matrices at its default convergence threshold; a slightly looser threshold
/// avoids the degenerate shift.
pub fn eigh<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> SymmetricEigen<T, Dyn> {
    let mut last = None;
    for scale in [1.0, 4.0, 16.0, 256.0, 4096.0] {
        if let Some(e) = m.clone().try_symmetric_eigen(f64::EPSILON * scale, 0) {
            let finite = e.eigenvalues.iter().all(|v| v.is_finite())
                && e.eigenvectors.iter().all(|v| v.clone().is_finite());
            if finite {
                return e;
            }
            last = Some(e);
        }
    }
    last.expect("eigendecomposition converged")
}

/// Eigenvalues of a symmetric/Hermitian matrix, unsorted; see [`eigh`].
pub fn eigvalsh<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DVector<f64> {
    eigh(m).eigenvalues
}

pub(crate) fn check_dense_size(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        Err(Error::TooLarge(n))
    } else {
        Ok(())
    }
}

/// A subset of the particles `{1, ..., n}` stored as a bitmask
/// (bit `j-1` set iff particle `j` belongs to the subset).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    n: usize,
    mask: u64,
}

impl Subset {
    pub fn new(n: usize, mask: u64) -> Result<Self> {
        if n > 63 {
            return Err(Error::TooLarge(n));
        }
        if mask >> n != 0 {
            return Err(Error::DimMismatch(format!(
                "mask {mask:#b} has bits beyond particle {n}"
            )));
        }
        Ok(Subset { n, mask })
    }

    /// Builds a subset from 1-based particle indices. Duplicates are ignored.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &j in indices {
            if j == 0 || j > n {
                return Err(Error::DimMismatch(format!(
                    "particle index {j} outside 1..={n}"
                )));
            }
            mask |= 1 << (j - 1);
        }
        Subset::new(n, mask)
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= 63);
        Subset {
            n,
            mask: if n == 0 { 0 } else { u64::MAX >> (64 - n) },
        }
    }

    pub fn empty(n: usize) -> Self {
        Subset { n, mask: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, particle: usize) -> bool {
        particle >= 1 && particle <= self.n && self.mask >> (particle - 1) & 1 == 1
    }

    /// Particles in ascending order, 1-based.
    pub fn indices(&self) -> Vec<usize> {
        (1..=self.n).filter(|&j| self.contains(j)).collect()
    }

    pub fn complement(&self) -> Subset {
        Subset {
            n: self.n,
            mask: Subset::full(self.n).mask & !self.mask,
        }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.mask & !other.mask == 0
    }

    /// Mask over computational-basis index bits selecting this subset's particles.
    pub fn index_mask(&self) -> usize {
        self.indices()
            .into_iter()
            .map(|j| 1usize << (self.n - j))
            .fold(0, |acc, b| acc | b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Density,
    Pure,
}

/// A validated n-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    matrix: CMat,
    kind: StateKind,
}

impl DenseState {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity (-1e-9).
    pub fn from_matrix(n: usize, matrix: CMat) -> Result<Self> {
        check_dense_size(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimMismatch(format!(
                "expected {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let verdict = is_density(&matrix, STRUCT_TOL);
        if verdict.hermitian_dev > STRUCT_TOL {
            return Err(Error::NotHermitian(verdict.hermitian_dev));
        }
        if (verdict.trace - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", verdict.trace)));
        }
        if verdict.min_eigenvalue < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                verdict.min_eigenvalue
            )));
        }
        Ok(DenseState {
            n,
            matrix: hermitian_part(&matrix),
            kind: StateKind::Density,
        })
    }

    pub(crate) fn from_matrix_unchecked(n: usize, matrix: CMat) -> Self {
        DenseState {
            n,
            matrix,
            kind: StateKind::Density,
        }
    }

    pub fn from_pure(psi: &PureVector) -> Self {
        let v = psi.amplitudes();
        DenseState {
            n: psi.n(),
            matrix: v * v.adjoint(),
            kind: StateKind::Pure,
        }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dense_size(n)?;
        let dim = 1usize << n;
        Ok(DenseState {
            n,
            matrix: CMat::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
            kind: StateKind::Density,
        })
    }

    /// Convex combination `(1 - p) self + p other`.
    pub fn mix(&self, other: &DenseState, p: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimMismatch(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(DenseState::from_matrix_unchecked(
            self.n,
            &self.matrix * c(1.0 - p, 0.0) + &other.matrix * c(p, 0.0),
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    /// `Re Tr(op rho)`.
    pub fn expectation(&self, op: &CMat) -> f64 {
        trace_product(op, &self.matrix).re
    }
}

/// A normalized n-qubit state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureVector {
    n: usize,
    amps: CVec,
}

impl PureVector {
    pub fn new(n: usize, amps: CVec) -> Result<Self> {
        check_dense_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimMismatch(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2} != 1")));
        }
        Ok(PureVector { n, amps })
    }

    /// Normalizes `amps` before validating.
    pub fn normalized(n: usize, amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        PureVector::new(n, amps.unscale(norm))
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_dense_size(n)?;
        if index >= 1 << n {
            return Err(Error::DimMismatch(format!("basis index {index} out of range")));
        }
        let mut amps = CVec::zeros(1 << n);
        amps[index] = c(1.0, 0.0);
        Ok(PureVector { n, amps })
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`.
    pub fn ghz(n: usize) -> Result<Self> {
        check_dense_size(n)?;
        let dim = 1usize << n;
        let mut amps = CVec::zeros(dim);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = c(h, 0.0);
        amps[dim - 1] = c(h, 0.0);
        Ok(PureVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn density(&self) -> DenseState {
        DenseState::from_pure(self)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureVector) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimMismatch(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Index offsets for every assignment of the given particles, MSB = first listed.
fn assignment_offsets(n: usize, particles: &[usize]) -> Vec<usize> {
    let k = particles.len();
    (0..1usize << k)
        .map(|r| {
            particles
                .iter()
                .enumerate()
                .filter(|(t, _)| r >> (k - 1 - t) & 1 == 1)
                .fold(0usize, |acc, (_, &j)| acc | 1 << (n - j))
        })
        .collect()
}

/// Partial trace of an arbitrary operator on n qubits, keeping `keep`.
pub fn partial_trace_op(m: &CMat, keep: &Subset) -> Result<CMat> {
    let n = keep.n();
    if m.nrows() != m.ncols() || qubits_of_dim(m.nrows())? != n {
        return Err(Error::DimMismatch(format!(
            "operator of size {}x{} does not act on {n} qubits",
            m.nrows(),
            m.ncols()
        )));
    }
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    let kept = keep.indices();
    let traced = keep.complement().indices();
    let keep_off = assignment_offsets(n, &kept);
    let trace_off = assignment_offsets(n, &traced);
    let d = keep_off.len();
    let mut out = CMat::zeros(d, d);
    for (r, &kr) in keep_off.iter().enumerate() {
        for (col, &kc) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += m[(kr | t, kc | t)];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on `keep`; particle order inside `keep` stays ascending.
pub fn partial_trace(rho: &DenseState, keep: &Subset) -> Result<DenseState> {
    if keep.n() != rho.n() {
        return Err(Error::DimMismatch(format!(
            "subset over {} particles, state over {}",
            keep.n(),
            rho.n()
        )));
    }
    let m = partial_trace_op(rho.matrix(), keep)?;
    Ok(DenseState::from_matrix_unchecked(keep.len(), m))
}

/// Partial transpose over the particles in `s` (an involution).
pub fn partial_transpose(m: &CMat, s: &Subset) -> Result<CMat> {
    let n = s.n();
    if m.nrows() != m.ncols() || qubits_of_dim(m.nrows())? != n {
        return Err(Error::DimMismatch(format!(
            "operator of size {}x{} does not act on {n} qubits",
            m.nrows(),
            m.ncols()
        )));
    }
    let sm = s.index_mask();
    let dim = m.nrows();
    let mut out = CMat::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            let r2 = (r & !sm) | (col & sm);
            let c2 = (col & !sm) | (r & sm);
            out[(r2, c2)] = m[(r, col)];
        }
    }
    Ok(out)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation `|M - M^dagger|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMat) -> Result<Vec<f64>> {
    let dev = hermitian_deviation(h);
    if dev > STRUCT_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let mut vals: Vec<f64> = eigvalsh(&hermitian_part(h)).iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMat) -> Result<f64> {
    if h.nrows() == 0 {
        return Err(Error::DimMismatch("empty matrix".into()));
    }
    Ok(hermitian_eigenvalues(h)?[0])
}

/// Single-qubit Pauli matrix for a label in `{I, X, Y, Z}`.
pub fn pauli_matrix(label: char) -> Result<CMat> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let m = match label {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        other => return Err(Error::BadLabel(other)),
    };
    Ok(CMat::from_row_slice(2, 2, &m))
}

/// Tensor product of single-qubit Paulis, e.g. `"XXI"`; particle 1 first.
pub fn pauli_string(n: usize, spec: &str) -> Result<CMat> {
    let labels: Vec<char> = spec.chars().collect();
    if labels.len() != n {
        return Err(Error::DimMismatch(format!(
            "Pauli string {spec:?} has {} labels, expected {n}",
            labels.len()
        )));
    }
    check_dense_size(n)?;
    let mut out = CMat::identity(1, 1);
    for l in labels {
        out = kron(&out, &pauli_matrix(l)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityCheck {
    Hermitian,
    Trace,
    Positivity,
}

/// Outcome of [`is_density`]; `failing` names the first violated check.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVerdict {
    pub ok: bool,
    pub failing: Option<DensityCheck>,
    pub hermitian_dev: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

pub fn is_density(m: &CMat, tol: f64) -> DensityVerdict {
    let hermitian_dev = hermitian_deviation(m);
    if !hermitian_dev.is_finite() || m.nrows() == 0 {
        return DensityVerdict {
            ok: false,
            failing: Some(DensityCheck::Hermitian),
            hermitian_dev,
            trace: f64::NAN,
            min_eigenvalue: f64::NAN,
        };
    }
    let trace = m.trace().re;
    let min_eigenvalue = eigvalsh(&hermitian_part(m))
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let failing = if hermitian_dev > tol {
        Some(DensityCheck::Hermitian)
    } else if (trace - 1.0).abs() > tol {
        Some(DensityCheck::Trace)
    } else if min_eigenvalue < -tol.max(PSD_TOL) {
        Some(DensityCheck::Positivity)
    } else {
        None
    };
    DensityVerdict {
        ok: failing.is_none(),
        failing,
        hermitian_dev,
        trace,
        min_eigenvalue,
    }
}
