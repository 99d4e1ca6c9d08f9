//! Symmetric (permutation-invariant) n-qubit states in the Dicke basis.
//!
//! Diagonal symmetric states are mixtures `sum_i lambda_i |D_n^i><D_n^i|`.
//! Their separability is decided by two Hankel moment matrices, their
//! marginals stay diagonal, and the question of whether the k-body marginals
//! determine the state reduces to a small linear system in the diagonal
//! weights plus a rank condition on the off-diagonal coefficients.
//!
//! Weight-level arithmetic is generic over [`Field`] so the same code runs
//! on `f64` and on exact rationals.

use std::fmt::Debug;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hypergraph::{all_k_subsets, SubsetCollection};
use crate::lp::{self, LpOutcome};
use crate::qcore::{
    self, c, check_dense_size, hermitian_deviation, max_abs_diff, min_eigenvalue, partial_trace,
    partial_transpose, CMat, CVec, DenseState, PureVector, Subset, C64, PSD_TOL, STRUCT_TOL,
};

/// Weights below this magnitude count as zero in support patterns.
pub const NONZERO_TOL: f64 = 1e-12;
/// Tolerance of the linear programs behind the uniqueness tests.
pub const LP_TOL: f64 = 1e-9;

/// Scalars the weight-level formulas are evaluated over.
pub trait Field: Clone + Debug + Num + FromPrimitive + PartialOrd + Signed {}
impl<T: Clone + Debug + Num + FromPrimitive + PartialOrd + Signed> Field for T {}

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
    }
    acc as u64
}

fn binom<T: Field>(n: i64, k: i64) -> T {
    T::from_u64(binomial(n, k)).expect("binomial fits the field")
}

fn int<T: Field>(v: i64) -> T {
    T::from_i64(v).expect("integer fits the field")
}

// ---------------------------------------------------------------------------
// weight-level formulas

/// Diagonal k-body marginal: `mu_s = sum_i lambda_i C(k,s) C(n-k,i-s) / C(n,i)`.
pub fn marginal_weights<T: Field>(lambda: &[T], k: usize) -> Vec<T> {
    let n = lambda.len() as i64 - 1;
    let k = k as i64;
    (0..=k)
        .map(|s| {
            lambda
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (i, l)| {
                    let i = i as i64;
                    let num = binom::<T>(k, s) * binom::<T>(n - k, i - s);
                    if num.is_zero() {
                        acc
                    } else {
                        acc + l.clone() * num / binom::<T>(n, i)
                    }
                })
        })
        .collect()
}

/// Hankel moment matrices `(M0, M1)` with `p_i = lambda_i / C(n, i)`.
pub fn hankel_entries<T: Field>(lambda: &[T]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let n = lambda.len() - 1;
    let p: Vec<T> = lambda
        .iter()
        .enumerate()
        .map(|(i, l)| l.clone() / binom::<T>(n as i64, i as i64))
        .collect();
    let d0 = n / 2 + 1;
    let d1 = n.div_ceil(2);
    let m0 = (0..d0).map(|r| (0..d0).map(|c| p[r + c].clone()).collect()).collect();
    let m1 = (0..d1).map(|r| (0..d1).map(|c| p[r + c + 1].clone()).collect()).collect();
    (m0, m1)
}

fn moment<T: Field>(lambda: &[T], f: impl Fn(i64, i64) -> i64) -> T {
    let n = lambda.len() as i64 - 1;
    lambda
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, l)| acc + l.clone() * int::<T>(f(i as i64, n)))
}

/// Two-body PPT expression; the 2-marginal is PPT iff it is `>= 0`.
pub fn marginal2_expression<T: Field>(lambda: &[T]) -> T {
    let a = moment(lambda, |i, n| (n - i) * (n - i - 1));
    let b = moment(lambda, |i, _| i * (i - 1));
    let c = moment(lambda, |i, n| i * (n - i));
    a * b - c.clone() * c
}

/// The two three-body PPT expressions; the 3-marginal is PPT iff both are `>= 0`.
pub fn marginal3_expressions<T: Field>(lambda: &[T]) -> [T; 2] {
    let a = moment(lambda, |i, n| (n - i) * (n - i - 1) * (n - i - 2));
    let b = moment(lambda, |i, n| i * (i - 1) * (n - i));
    let c = moment(lambda, |i, n| i * (n - i) * (n - i - 1));
    let d = moment(lambda, |i, _| i * (i - 1) * (i - 2));
    let first = a * b.clone() - c.clone() * c.clone();
    let second = c * d - b.clone() * b;
    [first, second]
}

/// Determinant by fraction-free Gaussian elimination over a field.
pub fn determinant<T: Field>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return T::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pivot.clone();
            for cc in col..n {
                let v = a[col][cc].clone();
                a[r][cc] = a[r][cc].clone() - f.clone() * v;
            }
        }
    }
    det
}

/// Exact positive-semidefiniteness test: every principal minor is `>= 0`.
pub fn is_psd_by_minors<T: Field>(m: &[Vec<T>]) -> bool {
    let n = m.len();
    (1u32..1 << n).all(|sel| {
        let idx: Vec<usize> = (0..n).filter(|i| sel >> i & 1 == 1).collect();
        let sub: Vec<Vec<T>> = idx
            .iter()
            .map(|&r| idx.iter().map(|&c| m[r][c].clone()).collect())
            .collect();
        determinant(&sub) >= T::zero()
    })
}

/// Coefficient of the free parameter `s_i` (`i > k`) in coordinate `r` of
/// the general solution of the level-k diagonal marginal equations.
pub fn null_coefficient<T: Field>(n: usize, k: usize, r: usize, i: usize) -> T {
    debug_assert!(i > k && i <= n);
    if r > k {
        return if r == i { T::one() } else { T::zero() };
    }
    let sign = if (k - r + 1) % 2 == 0 { T::one() } else { -T::one() };
    sign * binom::<T>(i as i64, k as i64) * binom::<T>(k as i64, r as i64) * int::<T>((i - k) as i64)
        / int::<T>((i - r) as i64)
}

/// All diagonal solutions `a` of `marginal_weights(a, k) == marginal_weights(lambda, k)`,
/// parameterized by the free coordinates `s_{k+1}, ..., s_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFamily<T> {
    pub n: usize,
    pub k: usize,
    pub particular: Vec<T>,
    /// `basis[j]` is the direction moved by free parameter `s_{k+1+j}`.
    pub basis: Vec<Vec<T>>,
}

impl<T: Field> SolutionFamily<T> {
    pub fn new(lambda: &[T], k: usize) -> Result<Self> {
        let n = lambda.len() - 1;
        if k == 0 || k >= n {
            return Err(Error::BadLevel { n, level: k });
        }
        let basis = (k + 1..=n)
            .map(|i| (0..=n).map(|r| null_coefficient::<T>(n, k, r, i)).collect())
            .collect();
        Ok(SolutionFamily {
            n,
            k,
            particular: lambda.to_vec(),
            basis,
        })
    }

    pub fn free_parameters(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, s: &[T]) -> Vec<T> {
        assert_eq!(s.len(), self.basis.len(), "wrong number of free parameters");
        let mut out = self.particular.clone();
        for (dir, sv) in self.basis.iter().zip(s) {
            for (o, d) in out.iter_mut().zip(dir) {
                *o = o.clone() + d.clone() * sv.clone();
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// state types

/// Diagonal symmetric state: mixture weights over the Dicke projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeMixture {
    n: usize,
    lambda: Vec<f64>,
}

impl DickeMixture {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::BadLambda("need at least n + 1 = 2 weights".into()));
        }
        if lambda.iter().any(|&l| !(l >= -NONZERO_TOL)) {
            return Err(Error::BadLambda("weights must be nonnegative".into()));
        }
        let total: f64 = lambda.iter().sum();
        if (total - 1.0).abs() > STRUCT_TOL {
            return Err(Error::BadLambda(format!("weights sum to {total}")));
        }
        Ok(DickeMixture {
            n: lambda.len() - 1,
            lambda,
        })
    }

    /// Single Dicke state `|D_n^i>` as a mixture.
    pub fn dicke(n: usize, i: usize) -> Result<Self> {
        if i > n {
            return Err(Error::BadWeight { n, weight: i });
        }
        let mut lambda = vec![0.0; n + 1];
        lambda[i] = 1.0;
        DickeMixture::new(lambda)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_nonzero(&self, i: usize) -> bool {
        self.lambda.get(i).is_some_and(|l| l.abs() > NONZERO_TOL)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..=self.n).filter(|&i| self.is_nonzero(i)).collect()
    }

    /// Image under the global bit flip `X^{⊗n}`: `lambda_i -> lambda_{n-i}`.
    pub fn bit_flip(&self) -> DickeMixture {
        DickeMixture {
            n: self.n,
            lambda: self.lambda.iter().rev().copied().collect(),
        }
    }

    pub fn to_coeffs(&self) -> SymmetricCoeffs {
        let a = CMat::from_diagonal(&CVec::from_iterator(
            self.n + 1,
            self.lambda.iter().map(|&l| c(l, 0.0)),
        ));
        SymmetricCoeffs { n: self.n, a }
    }
}

/// Diagonal symmetric state with exact rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMixture {
    n: usize,
    lambda: Vec<BigRational>,
}

impl ExactMixture {
    pub fn new(lambda: Vec<BigRational>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::BadLambda("need at least n + 1 = 2 weights".into()));
        }
        if lambda.iter().any(|l| l.is_negative()) {
            return Err(Error::BadLambda("weights must be nonnegative".into()));
        }
        let total = lambda.iter().fold(BigRational::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(Error::BadLambda(format!("weights sum to {total}")));
        }
        Ok(ExactMixture {
            n: lambda.len() - 1,
            lambda,
        })
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Result<Self> {
        ExactMixture::new(
            pairs
                .iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[BigRational] {
        &self.lambda
    }

    pub fn to_float(&self) -> DickeMixture {
        DickeMixture {
            n: self.n,
            lambda: self.lambda.iter().map(|l| l.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    pub fn marginal(&self, k: usize) -> Result<ExactMixture> {
        if k == 0 || k > self.n {
            return Err(Error::BadLevel { n: self.n, level: k });
        }
        Ok(ExactMixture {
            n: k,
            lambda: marginal_weights(&self.lambda, k),
        })
    }

    pub fn hankel(&self) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
        hankel_entries(&self.lambda)
    }

    /// Exact PPT decision through principal minors of both Hankel matrices.
    pub fn is_ppt(&self) -> bool {
        let (m0, m1) = self.hankel();
        is_psd_by_minors(&m0) && is_psd_by_minors(&m1)
    }

    pub fn marginal2_value(&self) -> BigRational {
        marginal2_expression(&self.lambda)
    }

    pub fn marginal3_values(&self) -> [BigRational; 2] {
        marginal3_expressions(&self.lambda)
    }

    /// Exact EDL: smallest level whose marginal is NPT; `None` when fully separable.
    pub fn edl(&self) -> Option<usize> {
        (2..=self.n).find(|&k| !self.marginal(k).expect("level in range").is_ppt())
    }
}

/// General symmetric state `sum_{i,j} a_{ij} |D_n^i><D_n^j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricCoeffs {
    n: usize,
    a: CMat,
}

impl SymmetricCoeffs {
    pub fn new(n: usize, a: CMat) -> Result<Self> {
        if a.nrows() != n + 1 || a.ncols() != n + 1 {
            return Err(Error::DimMismatch(format!(
                "coefficient matrix must be {0}x{0}",
                n + 1
            )));
        }
        let dev = hermitian_deviation(&a);
        if dev > STRUCT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = a.trace().re;
        if (tr - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let me = min_eigenvalue(&a)?;
        if me < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {me:.3e}")));
        }
        Ok(SymmetricCoeffs {
            n,
            a: qcore::hermitian_part(&a),
        })
    }

    /// Pure symmetric state `sum_i amps[i] |D_n^i>` (normalized on input).
    pub fn from_pure(amps: &[C64]) -> Result<Self> {
        let n = amps.len() - 1;
        let v = CVec::from_column_slice(amps);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = v.unscale(norm);
        SymmetricCoeffs::new(n, &v * v.adjoint())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.a[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..=self.n).all(|i| (0..=self.n).all(|j| i == j || self.a[(i, j)].norm() <= tol))
    }

    pub fn bit_flip(&self) -> SymmetricCoeffs {
        let n = self.n;
        SymmetricCoeffs {
            n,
            a: CMat::from_fn(n + 1, n + 1, |i, j| self.a[(n - i, n - j)]),
        }
    }

    /// Dense `2^n x 2^n` embedding built from Dicke vectors.
    pub fn to_dense(&self) -> Result<DenseState> {
        check_dense_size(self.n)?;
        let vecs = (0..=self.n)
            .map(|i| dicke_vector(self.n, i).map(|v| v.amplitudes().clone()))
            .collect::<Result<Vec<_>>>()?;
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for i in 0..=self.n {
            for j in 0..=self.n {
                let a = self.a[(i, j)];
                if a != C64::new(0.0, 0.0) {
                    m += &vecs[i] * vecs[j].adjoint() * a;
                }
            }
        }
        DenseState::from_matrix(self.n, m)
    }
}

/// `|D_n^i>`: uniform superposition of the basis states of Hamming weight `i`.
pub fn dicke_vector(n: usize, i: usize) -> Result<PureVector> {
    check_dense_size(n)?;
    if i > n {
        return Err(Error::BadWeight { n, weight: i });
    }
    let amp = 1.0 / (binomial(n as i64, i as i64) as f64).sqrt();
    let amps = CVec::from_iterator(
        1 << n,
        (0..1usize << n).map(|x| {
            if x.count_ones() as usize == i {
                c(amp, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }),
    );
    PureVector::new(n, amps)
}

/// Coefficients `(i, j, s, t, w)` of the linear map from n-qubit Dicke-basis
/// coefficients to the k-body marginal: `b[s][t] += w * a[i][j]`.
pub(crate) fn marginal_terms(n: usize, k: usize) -> Vec<(usize, usize, usize, usize, f64)> {
    let (ni, ki, nk) = (n as i64, k as i64, (n - k) as i64);
    let mut out = Vec::new();
    for i in 0..=ni {
        for j in 0..=ni {
            let norm = ((binomial(ni, i) * binomial(ni, j)) as f64).sqrt();
            for s in 0..=ki {
                let t = j - i + s;
                if !(0..=ki).contains(&t) {
                    continue;
                }
                let w = binomial(nk, i - s) as f64;
                if w == 0.0 {
                    continue;
                }
                let coef = w * ((binomial(ki, s) * binomial(ki, t)) as f64).sqrt() / norm;
                out.push((i as usize, j as usize, s as usize, t as usize, coef));
            }
        }
    }
    out
}

/// k-body marginal of a symmetric state, in the k-qubit Dicke basis.
pub fn symmetric_marginal(a: &SymmetricCoeffs, k: usize) -> Result<SymmetricCoeffs> {
    let n = a.n;
    if k == 0 || k > n {
        return Err(Error::BadLevel { n, level: k });
    }
    if k == n {
        return Ok(a.clone());
    }
    let mut b = CMat::zeros(k + 1, k + 1);
    for (i, j, s, t, w) in marginal_terms(n, k) {
        b[(s, t)] += a.a[(i, j)] * w;
    }
    Ok(SymmetricCoeffs {
        n: k,
        a: qcore::hermitian_part(&b),
    })
}

/// Diagonal k-body marginal of a Dicke mixture.
pub fn diagonal_marginal(lam: &DickeMixture, k: usize) -> Result<DickeMixture> {
    if k == 0 || k > lam.n {
        return Err(Error::BadLevel { n: lam.n, level: k });
    }
    if k == lam.n {
        return Ok(lam.clone());
    }
    Ok(DickeMixture {
        n: k,
        lambda: marginal_weights(&lam.lambda, k),
    })
}

/// The two Hankel moment matrices of a Dicke mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelPair {
    pub m0: DMatrix<f64>,
    pub m1: DMatrix<f64>,
}

pub fn hankel_pair(lam: &DickeMixture) -> HankelPair {
    let (m0, m1) = hankel_entries(&lam.lambda);
    let to_mat = |v: Vec<Vec<f64>>| {
        let d = v.len();
        DMatrix::from_fn(d, d, |r, c| v[r][c])
    };
    HankelPair {
        m0: to_mat(m0),
        m1: to_mat(m1),
    }
}

fn real_min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    qcore::eigvalsh(m).iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PptVerdict {
    pub ppt: bool,
    pub min_eig_m0: f64,
    pub min_eig_m1: f64,
}

impl PptVerdict {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig_m0.min(self.min_eig_m1)
    }
}

/// PPT test for Dicke mixtures via the Hankel moment matrices.
pub fn is_ppt_diagonal(lam: &DickeMixture, tol: f64) -> PptVerdict {
    let h = hankel_pair(lam);
    let min_eig_m0 = real_min_eig(&h.m0);
    let min_eig_m1 = real_min_eig(&h.m1);
    PptVerdict {
        ppt: min_eig_m0 >= -tol && min_eig_m1 >= -tol,
        min_eig_m0,
        min_eig_m1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marginal2Verdict {
    pub ppt: bool,
    pub value: f64,
}

pub fn marginal2_ppt(lam: &DickeMixture) -> Result<Marginal2Verdict> {
    if lam.n < 2 {
        return Err(Error::BadLevel { n: lam.n, level: 2 });
    }
    let value = marginal2_expression(&lam.lambda);
    Ok(Marginal2Verdict {
        ppt: value >= -PSD_TOL,
        value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marginal3Verdict {
    pub ppt: bool,
    pub values: [f64; 2],
}

pub fn marginal3_ppt(lam: &DickeMixture) -> Result<Marginal3Verdict> {
    if lam.n < 3 {
        return Err(Error::BadLevel { n: lam.n, level: 3 });
    }
    let values = marginal3_expressions(&lam.lambda);
    Ok(Marginal3Verdict {
        ppt: values.iter().all(|&v| v >= -PSD_TOL),
        values,
    })
}

// ---------------------------------------------------------------------------
// entanglement detection length

#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalEdl {
    /// `certificate` is the most negative Hankel eigenvalue at level `edl`.
    Entangled { edl: usize, certificate: f64 },
    NotEntangled,
}

impl DiagonalEdl {
    pub fn value(&self) -> Option<usize> {
        match self {
            DiagonalEdl::Entangled { edl, .. } => Some(*edl),
            DiagonalEdl::NotEntangled => None,
        }
    }
}

/// EDL of a Dicke mixture: first level whose marginal is NPT.
pub fn edl_diagonal(lam: &DickeMixture) -> DiagonalEdl {
    for k in 2..=lam.n {
        let m = diagonal_marginal(lam, k).expect("level in range");
        let v = is_ppt_diagonal(&m, PSD_TOL);
        if !v.ppt {
            return DiagonalEdl::Entangled {
                edl: k,
                certificate: v.min_eigenvalue(),
            };
        }
    }
    DiagonalEdl::NotEntangled
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Some PPT level could not be certified separable; see [`SymmetricEdl`].
    PptBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelPpt {
    pub level: usize,
    pub min_eigenvalue: f64,
    pub diagonal: bool,
}

/// EDL of a general symmetric state from PPT tests on its marginals.
///
/// PPT decides separability for marginals on at most three qubits and for
/// diagonal marginals. When a PPT level escapes both cases the result is
/// flagged [`Exactness::PptBound`]: `edl` (if any) is then only an upper
/// bound, and `None` means no entanglement was detected.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEdl {
    pub edl: Option<usize>,
    pub exactness: Exactness,
    /// Smallest eigenvalue of the partial transpose at level `edl`.
    pub certificate: Option<f64>,
    pub levels: Vec<LevelPpt>,
}

pub fn edl_symmetric(a: &SymmetricCoeffs) -> Result<SymmetricEdl> {
    let mut levels = Vec::new();
    let mut exact = true;
    for k in 2..=a.n {
        let m = symmetric_marginal(a, k)?;
        let dense = m.to_dense()?;
        let half = Subset::from_indices(k, &(1..=k / 2).collect::<Vec<_>>())?;
        let me = min_eigenvalue(&partial_transpose(dense.matrix(), &half)?)?;
        let diagonal = m.is_diagonal(STRUCT_TOL);
        levels.push(LevelPpt {
            level: k,
            min_eigenvalue: me,
            diagonal,
        });
        if me < -PSD_TOL {
            return Ok(SymmetricEdl {
                edl: Some(k),
                exactness: if exact { Exactness::Exact } else { Exactness::PptBound },
                certificate: Some(me),
                levels,
            });
        }
        if k > 3 && !diagonal {
            exact = false;
        }
    }
    Ok(SymmetricEdl {
        edl: None,
        exactness: if exact { Exactness::Exact } else { Exactness::PptBound },
        certificate: None,
        levels,
    })
}

// ---------------------------------------------------------------------------
// state determination length

/// Family of diagonal solutions at level `k` for a float mixture.
pub fn solution_family(lam: &DickeMixture, k: usize) -> Result<SolutionFamily<f64>> {
    SolutionFamily::new(&lam.lambda, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlternativeSolution {
    pub exists: bool,
    /// A nonnegative diagonal solution different from `lambda`, when one exists.
    pub witness: Option<Vec<f64>>,
}

/// Whether the level-k diagonal marginal equations admit a nonnegative
/// solution other than `lambda` (which forces SDL > k).
pub fn has_alternative_nonneg(lam: &DickeMixture, k: usize) -> Result<AlternativeSolution> {
    let n = lam.n;
    let fam = solution_family(lam, k)?;
    let free = fam.free_parameters();
    // variables y_j = a_{k+1+j} >= 0; coordinates r <= k must stay >= 0
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for r in 0..=k {
        let coeffs: Vec<f64> = (0..free).map(|j| fam.basis[j][r]).collect();
        let shift: f64 = (0..free).map(|j| coeffs[j] * lam.lambda[k + 1 + j]).sum();
        rows.push(coeffs.iter().map(|v| -v).collect());
        rhs.push(lam.lambda[r] - shift);
    }
    for j in 0..free {
        let mut row = vec![0.0; free];
        row[j] = 1.0;
        rows.push(row);
        rhs.push(1.0);
    }
    for j in 0..free {
        for sign in [1.0, -1.0] {
            let mut obj = vec![0.0; free];
            obj[j] = sign;
            match lp::maximize(&obj, &rows, &rhs, LP_TOL * 1e-3) {
                LpOutcome::Optimal { x, .. } => {
                    let target = lam.lambda[k + 1 + j];
                    if (x[j] - target).abs() > LP_TOL {
                        let s: Vec<f64> = (0..free).map(|t| x[t] - lam.lambda[k + 1 + t]).collect();
                        let point = fam.point(&s).into_iter().map(|v| v.max(0.0)).collect();
                        return Ok(AlternativeSolution {
                            exists: true,
                            witness: Some(point),
                        });
                    }
                }
                other => {
                    return Err(Error::SolverFail(format!(
                        "uniqueness LP at level {k} for n = {n}: {other:?}"
                    )))
                }
            }
        }
    }
    Ok(AlternativeSolution {
        exists: false,
        witness: None,
    })
}

/// Rank of an integer matrix, computed exactly.
fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[rank][col];
                for cc in col..ncols {
                    let v = &a[rank][cc] * &f;
                    a[r][cc] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Whether the level-m marginals of a Dicke mixture pin down the state.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDetermination {
    pub level: usize,
    /// No nonnegative diagonal alternative exists.
    pub unique_diagonal: bool,
    /// Offsets `j - i` along which off-diagonal coefficients between
    /// supported Dicke weights remain unconstrained.
    pub free_offsets: Vec<usize>,
    pub determined: bool,
}

/// Exact determination test at level `m >= 2`.
///
/// Compatible states are symmetric once `m >= 2`, their diagonal is bound by
/// the diagonal marginal equations, and coefficients `a_{i,i+d}` between
/// supported weights vanish iff the matrix `C(n-m, i-s)` (rows `s`, columns
/// supported `i`) has full column rank.
pub fn level_determines(lam: &DickeMixture, m: usize) -> Result<LevelDetermination> {
    let n = lam.n;
    if m < 2 || m > n {
        return Err(Error::BadLevel { n, level: m });
    }
    if m == n {
        return Ok(LevelDetermination {
            level: m,
            unique_diagonal: true,
            free_offsets: vec![],
            determined: true,
        });
    }
    let unique_diagonal = !has_alternative_nonneg(lam, m)?.exists;
    let mut free_offsets = Vec::new();
    for d in 1..=n {
        let cols: Vec<usize> = (0..=n - d)
            .filter(|&i| lam.is_nonzero(i) && lam.is_nonzero(i + d))
            .collect();
        if cols.is_empty() {
            continue;
        }
        if d > m {
            free_offsets.push(d);
            continue;
        }
        let rows: Vec<Vec<i64>> = (0..=m - d)
            .map(|s| {
                cols.iter()
                    .map(|&i| binomial((n - m) as i64, i as i64 - s as i64) as i64)
                    .collect()
            })
            .collect();
        if exact_rank(&rows) < cols.len() {
            free_offsets.push(d);
        }
    }
    Ok(LevelDetermination {
        level: m,
        unique_diagonal,
        determined: unique_diagonal && free_offsets.is_empty(),
        free_offsets,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FullLevelCondition {
    /// `lambda_0 lambda_n != 0`
    Ends,
    /// every odd weight nonzero
    AllOdd,
    /// every even weight nonzero
    AllEven,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullLevelVerdict {
    pub holds: bool,
    pub condition: Option<FullLevelCondition>,
}

/// Whether the SDL of a Dicke mixture equals `n`.
pub fn sdl_full_level(lam: &DickeMixture) -> FullLevelVerdict {
    let n = lam.n;
    let condition = if lam.is_nonzero(0) && lam.is_nonzero(n) {
        Some(FullLevelCondition::Ends)
    } else if (1..=n).step_by(2).all(|i| lam.is_nonzero(i)) {
        Some(FullLevelCondition::AllOdd)
    } else if (0..=n).step_by(2).all(|i| lam.is_nonzero(i)) {
        Some(FullLevelCondition::AllEven)
    } else {
        None
    };
    FullLevelVerdict {
        holds: condition.is_some(),
        condition,
    }
}

/// Closed-form SDL of `sum_{i<=k} lambda_i |D_n^i><D_n^i|` with at most one
/// vanishing weight `zero` among `0..=k`. With no vanishing weight the value
/// `k + min(1, n - k)` is used.
pub fn truncated_mixture_sdl(n: usize, k: usize, zero: Option<usize>) -> usize {
    match zero {
        Some(z) => k + ((k - z) % 2).min(n - k),
        None => k + 1.min(n - k),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdlRule {
    /// product state `|0...0>` or `|1...1>`
    RankOne,
    FullLevel(FullLevelCondition),
    ClosedForm { k: usize, zero: usize },
    /// closed form with no vanishing weight below the top of the support
    DerivedRule { k: usize },
    LinearSystems,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSdl {
    pub lo: usize,
    pub hi: usize,
    pub exact: bool,
    pub rule: SdlRule,
    /// The bit-flipped orientation was used for the closed form.
    pub flipped: bool,
}

fn is_product_end(lam: &DickeMixture) -> bool {
    let s = lam.support();
    s == [0] || s == [lam.n]
}

/// SDL bounds from the level-by-level determination tests alone.
pub fn sdl_linear_systems(lam: &DickeMixture) -> Result<(usize, usize)> {
    if is_product_end(lam) {
        return Ok((1, 1));
    }
    let mut lo = 2;
    let mut hi = lam.n;
    for m in 2..=lam.n {
        let det = level_determines(lam, m)?;
        if det.determined {
            hi = hi.min(m);
        } else {
            lo = lo.max(m + 1);
        }
    }
    Ok((lo, hi))
}

pub fn sdl_diagonal(lam: &DickeMixture) -> Result<DiagonalSdl> {
    if is_product_end(lam) {
        return Ok(DiagonalSdl {
            lo: 1,
            hi: 1,
            exact: true,
            rule: SdlRule::RankOne,
            flipped: false,
        });
    }
    let full = sdl_full_level(lam);
    if let Some(cond) = full.condition {
        return Ok(DiagonalSdl {
            lo: lam.n,
            hi: lam.n,
            exact: true,
            rule: SdlRule::FullLevel(cond),
            flipped: false,
        });
    }
    let top = |l: &DickeMixture| *l.support().last().expect("weights sum to one");
    let flipped_lam = lam.bit_flip();
    let flipped = top(&flipped_lam) < top(lam);
    let oriented = if flipped { &flipped_lam } else { lam };
    let k = top(oriented);
    let zeros: Vec<usize> = (0..=k).filter(|&i| !oriented.is_nonzero(i)).collect();
    match zeros.as_slice() {
        [] => {
            let l = truncated_mixture_sdl(lam.n, k, None);
            return Ok(DiagonalSdl {
                lo: l,
                hi: l,
                exact: true,
                rule: SdlRule::DerivedRule { k },
                flipped,
            });
        }
        [z] => {
            let l = truncated_mixture_sdl(lam.n, k, Some(*z));
            return Ok(DiagonalSdl {
                lo: l,
                hi: l,
                exact: true,
                rule: SdlRule::ClosedForm { k, zero: *z },
                flipped,
            });
        }
        _ => {}
    }
    let (lo, hi) = sdl_linear_systems(lam)?;
    Ok(DiagonalSdl {
        lo,
        hi,
        exact: lo == hi,
        rule: SdlRule::LinearSystems,
        flipped: false,
    })
}

/// SDL equals 1 iff at most one single-particle marginal is mixed.
pub fn rank_criterion_sdl1(rho: &DenseState) -> Result<bool> {
    let n = rho.n();
    let mut mixed = 0;
    for j in 1..=n {
        let red = partial_trace(rho, &Subset::from_indices(n, &[j])?)?;
        let vals = qcore::hermitian_eigenvalues(red.matrix())?;
        if vals[0] > PSD_TOL {
            mixed += 1;
        }
    }
    Ok(mixed <= 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub max_deviation: f64,
    pub worst: Option<Subset>,
}

/// Whether `sigma` and `rho` share every marginal listed in `coll`.
pub fn check_compatibility(
    sigma: &DenseState,
    rho: &DenseState,
    coll: &SubsetCollection,
    tol: f64,
) -> Result<CompatibilityVerdict> {
    if sigma.n() != rho.n() || coll.n() != rho.n() {
        return Err(Error::DimMismatch(format!(
            "sigma on {}, rho on {}, collection on {} particles",
            sigma.n(),
            rho.n(),
            coll.n()
        )));
    }
    let mut max_deviation: f64 = 0.0;
    let mut worst = None;
    for s in coll.edges() {
        let dev = max_abs_diff(
            partial_trace(sigma, s)?.matrix(),
            partial_trace(rho, s)?.matrix(),
        );
        if dev > max_deviation {
            max_deviation = dev;
            worst = Some(*s);
        }
    }
    Ok(CompatibilityVerdict {
        compatible: max_deviation <= tol,
        max_deviation,
        worst,
    })
}

// ---------------------------------------------------------------------------
// maximum-gap families

/// Pure state `alpha |D_n^1> + beta |D_n^n>` with EDL 2 and SDL `n - 1`.
#[derive(Clone, Debug)]
pub struct GapPure {
    pub n: usize,
    pub alpha: C64,
    pub beta: C64,
    pub state: PureVector,
    /// Rank-two state sharing every `(n-2)`-body marginal with `state`.
    pub sigma: DenseState,
    /// Hankel matrix of the two-body marginal (not positive semidefinite).
    pub m0: DMatrix<f64>,
    pub m0_min_eigenvalue: f64,
    pub compatibility_deviation: f64,
    pub edl: usize,
    pub sdl: usize,
    pub gap: usize,
}

pub fn gap_pure_family(n: usize, alpha: C64) -> Result<GapPure> {
    if n < 4 {
        return Err(Error::BadAmplitude(format!("n = {n} must be at least 4")));
    }
    check_dense_size(n)?;
    let a2 = alpha.norm_sqr();
    let nf = n as f64;
    let lower = (nf * nf - 2.0 * nf) / (nf * nf - 2.0 * nf + 1.0);
    if !(a2 > lower && a2 < 1.0) {
        return Err(Error::BadAmplitude(format!(
            "|alpha|^2 = {a2} outside ({lower}, 1)"
        )));
    }
    let beta = c((1.0 - a2).sqrt(), 0.0);
    let mut amps = vec![c(0.0, 0.0); n + 1];
    amps[1] = alpha;
    amps[n] = beta;
    let coeffs = SymmetricCoeffs::from_pure(&amps)?;
    let d1 = dicke_vector(n, 1)?;
    let dn = dicke_vector(n, n)?;
    let state = PureVector::new(n, d1.amplitudes() * alpha + dn.amplitudes() * beta)?;

    let two = symmetric_marginal(&coeffs, 2)?;
    let two_diag = DickeMixture::new(two.diagonal())?;
    let m0 = hankel_pair(&two_diag).m0;
    let m0_min_eigenvalue = real_min_eig(&m0);

    let mut lambda = vec![0.0; n + 1];
    lambda[1] = a2;
    lambda[n] = 1.0 - a2;
    let sigma = DickeMixture::new(lambda)?.to_coeffs().to_dense()?;
    let compat = check_compatibility(&sigma, &state.density(), &all_k_subsets(n, n - 2)?, STRUCT_TOL)?;
    if m0_min_eigenvalue >= 0.0 || !compat.compatible {
        return Err(Error::BadAmplitude(format!(
            "certificate failed: min eig {m0_min_eigenvalue}, deviation {}",
            compat.max_deviation
        )));
    }
    Ok(GapPure {
        n,
        alpha,
        beta,
        state,
        sigma,
        m0,
        m0_min_eigenvalue,
        compatibility_deviation: compat.max_deviation,
        edl: 2,
        sdl: n - 1,
        gap: n - 3,
    })
}

/// Dicke mixture with EDL 2 and SDL `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapMixed {
    pub n: usize,
    /// `sum_{i,j} (n-i) j lambda_i lambda_j [(n-i-1)(j-1) - i(n-j)]`
    pub quadratic_form: f64,
    pub edl: usize,
    pub sdl: usize,
    pub gap: usize,
}

pub fn mixed_gap_form(lam: &DickeMixture) -> f64 {
    let n = lam.n as f64;
    let l = &lam.lambda;
    let mut acc = 0.0;
    for (i, li) in l.iter().enumerate() {
        for (j, lj) in l.iter().enumerate() {
            let (fi, fj) = (i as f64, j as f64);
            acc += (n - fi) * fj * li * lj * ((n - fi - 1.0) * (fj - 1.0) - fi * (n - fj));
        }
    }
    acc
}

pub fn gap_mixed_family(lam: &DickeMixture) -> Result<GapMixed> {
    let n = lam.n;
    if n < 2 {
        return Err(Error::BadLambda("n must be at least 2".into()));
    }
    if !(lam.is_nonzero(0) && lam.is_nonzero(n)) {
        return Err(Error::BadLambda("lambda_0 lambda_n must be nonzero".into()));
    }
    let quadratic_form = mixed_gap_form(lam);
    if quadratic_form >= 0.0 {
        return Err(Error::BadLambda(format!(
            "two-body form {quadratic_form} is not negative"
        )));
    }
    let full = sdl_full_level(lam);
    let m2 = marginal2_ppt(lam)?;
    debug_assert!(full.holds && !m2.ppt);
    Ok(GapMixed {
        n,
        quadratic_form,
        edl: 2,
        sdl: n,
        gap: n - 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_marginal, brute_ppt, dense_from_diagonal, dense_from_symmetric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    fn mix(l: &[f64]) -> DickeMixture {
        DickeMixture::new(l.to_vec()).unwrap()
    }

    fn random_mixture(n: usize, rng: &mut impl Rng) -> DickeMixture {
        let w: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
        let t: f64 = w.iter().sum();
        mix(&w.iter().map(|v| v / t).collect::<Vec<_>>())
    }

    pub(crate) fn random_coeffs(n: usize, rng: &mut impl Rng) -> SymmetricCoeffs {
        let d = n + 1;
        let g = CMat::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let t = m.trace();
        SymmetricCoeffs::new(n, m / t).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(4, -1), 0);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(62, 31), 465428353255261088);
    }

    #[test]
    fn dicke_vectors() {
        let d21 = dicke_vector(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = d21.amplitudes();
        assert!((a[1].re - h).abs() < 1e-15 && (a[2].re - h).abs() < 1e-15);
        assert_eq!(a[0], c(0.0, 0.0));
        assert_eq!(dicke_vector(3, 0).unwrap().amplitudes()[0], c(1.0, 0.0));
        let d42 = dicke_vector(4, 2).unwrap();
        let nz: Vec<_> = d42.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 6);
        assert!(nz.iter().all(|z| (z.re - 1.0 / 6f64.sqrt()).abs() < 1e-15));
        assert_eq!(dicke_vector(3, 4), Err(Error::BadWeight { n: 3, weight: 4 }));
    }

    #[test]
    fn dicke_marginal_of_d42() {
        let a = DickeMixture::dicke(4, 2).unwrap().to_coeffs();
        let m = symmetric_marginal(&a, 2).unwrap();
        let expected = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
        for s in 0..3 {
            assert!((m.matrix()[(s, s)].re - expected[s]).abs() < 1e-15);
        }
        assert!(m.is_diagonal(1e-15));
        let same = symmetric_marginal(&a, 4).unwrap();
        assert_eq!(same, a);
        assert_eq!(symmetric_marginal(&a, 0), Err(Error::BadLevel { n: 4, level: 0 }));
        assert_eq!(symmetric_marginal(&a, 5), Err(Error::BadLevel { n: 4, level: 5 }));
    }

    #[test]
    fn symmetric_marginal_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_coeffs(5, &mut rng);
        let m = symmetric_marginal(&a, 3).unwrap();
        let fast = m.to_dense().unwrap();
        let brute = brute_marginal(&dense_from_symmetric(&a).unwrap(), &Subset::from_indices(5, &[1, 2, 3]).unwrap())
            .unwrap();
        assert!(max_abs_diff(fast.matrix(), brute.matrix()) < 1e-10);
        // any 3-subset gives the same reduced state
        let other = brute_marginal(&dense_from_symmetric(&a).unwrap(), &Subset::from_indices(5, &[1, 4, 5]).unwrap())
            .unwrap();
        assert!(max_abs_diff(fast.matrix(), other.matrix()) < 1e-10);
    }

    #[test]
    fn diagonal_marginals() {
        let m = diagonal_marginal(&DickeMixture::dicke(4, 1).unwrap(), 2).unwrap();
        assert!((m.lambda()[0] - 0.5).abs() < 1e-15);
        assert!((m.lambda()[1] - 0.5).abs() < 1e-15);
        assert_eq!(m.lambda()[2], 0.0);
        // cross-check with dense partial trace
        let dense = brute_marginal(
            &dense_from_diagonal(&DickeMixture::dicke(4, 1).unwrap()).unwrap(),
            &Subset::from_indices(4, &[1, 2]).unwrap(),
        )
        .unwrap();
        assert!(max_abs_diff(dense.matrix(), &dense_from_diagonal(&m).unwrap().matrix().clone()) < 1e-14);

        let l = mix(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(diagonal_marginal(&l, 3).unwrap(), l);
        for n in 3..8 {
            let mut g = vec![0.0; n + 1];
            g[0] = 0.5;
            g[n] = 0.5;
            for k in 1..n {
                let m = diagonal_marginal(&mix(&g), k).unwrap();
                let mut expect = vec![0.0; k + 1];
                expect[0] = 0.5;
                expect[k] = 0.5;
                assert_eq!(m.lambda(), &expect[..]);
            }
        }
    }

    #[test]
    fn hankel_examples() {
        let h = hankel_pair(&mix(&[0.5, 0.0, 0.0, 0.0, 0.5]));
        assert_eq!(h.m0, DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]));

        let ex5 = ExactMixture::from_ratios(&[(1, 2), (1, 3), (1, 12), (1, 24), (1, 24)]).unwrap();
        let (m0, _) = ex5.hankel();
        let expect = [
            [q(1, 2), q(1, 12), q(1, 72)],
            [q(1, 12), q(1, 72), q(1, 96)],
            [q(1, 72), q(1, 96), q(1, 24)],
        ];
        for r in 0..3 {
            for cc in 0..3 {
                assert_eq!(m0[r][cc], expect[r][cc]);
            }
        }

        // uniform over the full space: constant Hankel, rank one
        let n = 6;
        let uni: Vec<f64> = (0..=n).map(|i| binomial(n, i) as f64 / 64.0).collect();
        let h = hankel_pair(&mix(&uni));
        let vals = h.m0.symmetric_eigenvalues();
        assert_eq!(vals.iter().filter(|v| v.abs() > 1e-12).count(), 1);
    }

    #[test]
    fn ppt_examples() {
        assert!(is_ppt_diagonal(&DickeMixture::dicke(5, 0).unwrap(), PSD_TOL).ppt);
        for n in 2..9 {
            for k in 1..n {
                let v = is_ppt_diagonal(&DickeMixture::dicke(n, k).unwrap(), PSD_TOL);
                assert!(!v.ppt, "n={n} k={k}");
            }
        }
        let ex5 = mix(&[0.5, 1.0 / 3.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 24.0]);
        let v = is_ppt_diagonal(&ex5, PSD_TOL);
        assert!(!v.ppt);
        assert!(v.min_eig_m0 < 0.0);
    }

    #[test]
    fn marginal2_examples() {
        for n in 2..9usize {
            for k in 1..n {
                let v = marginal2_ppt(&DickeMixture::dicke(n, k).unwrap()).unwrap();
                let (n, k) = (n as f64, k as f64);
                let expect = k * (k - 1.0) * (n - k) * (n - k - 1.0) - k * k * (n - k) * (n - k);
                assert!((v.value - expect).abs() < 1e-9);
                assert!(!v.ppt);
            }
            let l1 = 0.3;
            let mut l = vec![0.0; n + 1];
            l[0] = 1.0 - l1;
            l[1] = l1;
            let v = marginal2_ppt(&mix(&l)).unwrap();
            let nf = n as f64;
            assert!((v.value + (nf - 1.0).powi(2) * l1 * l1).abs() < 1e-12);
            if n >= 3 {
                let l2 = nf / (2.0 * nf - 2.0) * 0.7;
                let mut l = vec![0.0; n + 1];
                l[0] = 1.0 - l2;
                l[2] = l2;
                let v = marginal2_ppt(&mix(&l)).unwrap();
                let expect = 2.0 * (nf - 1.0) * l2 * (nf - (2.0 * nf - 2.0) * l2);
                assert!((v.value - expect).abs() < 1e-12);
                assert!(v.ppt);
                let v3 = marginal3_ppt(&mix(&l)).unwrap();
                assert!((v3.values[1] + 4.0 * (nf - 2.0).powi(2) * l2 * l2).abs() < 1e-12);
                assert!(!v3.ppt);
            }
        }
        assert!(marginal2_ppt(&mix(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn marginal3_examples_exact() {
        let ex4 = ExactMixture::from_ratios(&[(1, 24), (1, 3), (1, 12), (1, 2), (1, 24)]).unwrap();
        assert_eq!(ex4.marginal2_value(), q(7, 4));
        assert_eq!(ex4.marginal3_values()[1], q(-16, 9));
        let ex5 = ExactMixture::from_ratios(&[(1, 2), (1, 3), (1, 12), (1, 24), (1, 24)]).unwrap();
        assert_eq!(ex5.marginal3_values(), [q(49, 18), q(371, 144)]);
        let v = marginal3_ppt(&DickeMixture::dicke(5, 0).unwrap()).unwrap();
        assert_eq!(v.values, [0.0, 0.0]);
        assert!(v.ppt);
    }

    #[test]
    fn marginal2_expression_matches_hankel_determinant_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(2..9);
            let l = random_mixture(n, &mut rng);
            let v = marginal2_ppt(&l).unwrap().value;
            let two = diagonal_marginal(&l, 2).unwrap();
            let (m0, _) = hankel_entries(two.lambda());
            let det = determinant(&m0);
            // value = (n (n-1))^2 det(M0)
            if v.abs() > 1e-9 {
                assert_eq!(v > 0.0, det > 0.0, "n={n} value={v} det={det}");
            }
            let ratio = v / det;
            if det.abs() > 1e-9 {
                let nf = n as f64;
                assert!((ratio - (nf * (nf - 1.0)).powi(2)).abs() < 1e-6 * ratio.abs());
            }
        }
    }

    #[test]
    fn edl_examples() {
        for n in 3..9 {
            for i in 1..n {
                assert_eq!(edl_diagonal(&DickeMixture::dicke(n, i).unwrap()).value(), Some(2));
            }
            let nf = n as f64;
            let l2 = nf / (2.0 * nf - 2.0);
            let mut l = vec![0.0; n + 1];
            l[0] = 1.0 - l2;
            l[2] = l2;
            assert_eq!(edl_diagonal(&mix(&l)).value(), Some(3), "n={n}");
        }
        let ex5 = mix(&[0.5, 1.0 / 3.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 24.0]);
        assert_eq!(edl_diagonal(&ex5).value(), Some(4));
        assert_eq!(edl_diagonal(&DickeMixture::dicke(4, 0).unwrap()), DiagonalEdl::NotEntangled);
    }

    #[test]
    fn edl_symmetric_examples() {
        // 1/2 GHZ_3 + 1/2 D_3^1
        let mut a = CMat::zeros(4, 4);
        a[(0, 0)] = c(0.25, 0.0);
        a[(3, 3)] = c(0.25, 0.0);
        a[(0, 3)] = c(0.25, 0.0);
        a[(3, 0)] = c(0.25, 0.0);
        a[(1, 1)] = c(0.5, 0.0);
        let a = SymmetricCoeffs::new(3, a).unwrap();
        let two = symmetric_marginal(&a, 2).unwrap();
        assert!(two.is_diagonal(1e-15));
        let d = two.diagonal();
        assert!((d[0] - 5.0 / 12.0).abs() < 1e-15 && (d[1] - 1.0 / 3.0).abs() < 1e-15);
        let r = edl_symmetric(&a).unwrap();
        assert_eq!(r.edl, Some(3));
        assert_eq!(r.exactness, Exactness::Exact);

        for n in 3..7 {
            for i in 1..n {
                let r = edl_symmetric(&DickeMixture::dicke(n, i).unwrap().to_coeffs()).unwrap();
                assert_eq!(r.edl, Some(2));
            }
        }
        let r = edl_symmetric(&DickeMixture::dicke(4, 0).unwrap().to_coeffs()).unwrap();
        assert_eq!((r.edl, r.exactness), (None, Exactness::Exact));
    }

    #[test]
    fn edl_symmetric_invariant_under_bit_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let n = rng.random_range(2..6);
            let a = random_coeffs(n, &mut rng);
            assert_eq!(edl_symmetric(&a).unwrap().edl, edl_symmetric(&a.bit_flip()).unwrap().edl);
        }
    }

    #[test]
    fn npt_marginals_stay_npt_upward() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let n = rng.random_range(3..9);
            let l = random_mixture(n, &mut rng);
            let mut seen_npt = false;
            for k in 2..=n {
                let npt = !is_ppt_diagonal(&diagonal_marginal(&l, k).unwrap(), PSD_TOL).ppt;
                assert!(!seen_npt || npt, "NPT at a lower level but PPT at {k}: {:?}", l.lambda());
                seen_npt |= npt;
            }
        }
    }

    #[test]
    fn hankel_agrees_with_dense_ppt() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0;
        for _ in 0..200 {
            let n = rng.random_range(2..9);
            // sparse random weights give both verdicts
            let w: Vec<f64> = (0..=n)
                .map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 })
                .collect();
            let t: f64 = w.iter().sum();
            if t == 0.0 {
                continue;
            }
            let l = mix(&w.iter().map(|v| v / t).collect::<Vec<_>>());
            let h = is_ppt_diagonal(&l, 0.0);
            let half = Subset::from_indices(n, &(1..=n / 2).collect::<Vec<_>>()).unwrap();
            let dense = brute_ppt(&dense_from_diagonal(&l).unwrap(), &half, 0.0).unwrap();
            if h.min_eigenvalue().abs() > 1e-8 && dense.min_eigenvalue.abs() > 1e-8 {
                assert_eq!(h.ppt, dense.ppt, "{:?}", l.lambda());
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn solution_family_examples() {
        let l = [q(1, 2), q(0, 1), q(1, 2), q(0, 1), q(0, 1)];
        let fam = SolutionFamily::new(&l, 2).unwrap();
        assert_eq!(fam.point(&[q(0, 1), q(0, 1)]), l.to_vec());
        assert_eq!(
            fam.point(&[q(1, 24), q(1, 24)]),
            vec![q(8, 24), q(11, 24), q(3, 24), q(1, 24), q(1, 24)]
        );
        let l = [q(1, 3), q(0, 1), q(1, 3), q(1, 3), q(0, 1)];
        let fam = SolutionFamily::new(&l, 2).unwrap();
        // a_{3,3} = 1/3 + s_3 = 17/48, a_{4,4} = s_4 = 1/48
        assert_eq!(
            fam.point(&[q(1, 48), q(1, 48)]),
            vec![q(12, 48), q(11, 48), q(7, 48), q(17, 48), q(1, 48)]
        );
        assert!(SolutionFamily::new(&l, 4).is_err());
        assert!(SolutionFamily::new(&l, 0).is_err());
    }

    #[test]
    fn solution_family_points_solve_marginal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100 {
            let n = rng.random_range(2..9);
            let k = rng.random_range(1..n);
            let l = random_mixture(n, &mut rng);
            let fam = solution_family(&l, k).unwrap();
            let s: Vec<f64> = (0..fam.free_parameters()).map(|_| rng.random::<f64>() - 0.5).collect();
            let p = fam.point(&s);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let lhs = marginal_weights(&p, k);
            let rhs = marginal_weights(l.lambda(), k);
            for (x, y) in lhs.iter().zip(&rhs) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn alternative_solutions() {
        for n in 3..8 {
            for i in 1..n {
                assert!(!has_alternative_nonneg(&DickeMixture::dicke(n, i).unwrap(), 2).unwrap().exists);
            }
        }
        let alt = has_alternative_nonneg(&mix(&[0.5, 0.0, 0.5, 0.0, 0.0]), 2).unwrap();
        assert!(alt.exists);
        let w = alt.witness.unwrap();
        assert!(w.iter().all(|&v| v >= 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for n in 3..8 {
            let mut g = vec![0.0; n + 1];
            g[0] = 0.5;
            g[n] = 0.5;
            assert!(!has_alternative_nonneg(&mix(&g), n - 1).unwrap().exists);
        }
    }

    #[test]
    fn full_level_conditions() {
        assert_eq!(
            sdl_full_level(&mix(&[0.2, 0.0, 0.3, 0.0, 0.5])).condition,
            Some(FullLevelCondition::Ends)
        );
        for n in 3..8 {
            assert!(!sdl_full_level(&DickeMixture::dicke(n, 1).unwrap()).holds);
        }
        assert!(sdl_full_level(&mix(&[1.0 / 12.0, 0.5, 1.0 / 3.0, 1.0 / 12.0])).holds);
        assert_eq!(
            sdl_full_level(&mix(&[0.0, 0.5, 0.0, 0.5, 0.0])).condition,
            Some(FullLevelCondition::AllOdd)
        );
        assert_eq!(
            sdl_full_level(&mix(&[0.0, 0.0, 0.5, 0.0, 0.5, 0.0])).condition,
            None
        );
    }

    #[test]
    fn sdl_examples() {
        for n in 3..9 {
            for k in 1..n {
                let r = sdl_diagonal(&DickeMixture::dicke(n, k).unwrap()).unwrap();
                assert_eq!((r.lo, r.hi, r.exact), (2, 2, true), "n={n} k={k} {r:?}");
            }
            let mut l = vec![0.0; n + 1];
            l[0] = 0.4;
            l[2] = 0.6;
            assert_eq!(sdl_diagonal(&mix(&l)).unwrap().lo, 3);
            let mut l = vec![0.0; n + 1];
            l[0] = 0.4;
            l[1] = 0.6;
            assert_eq!(sdl_diagonal(&mix(&l)).unwrap().lo, 2);
            let mut l = vec![0.0; n + 1];
            l[1] = 0.4;
            l[2] = 0.6;
            assert_eq!(sdl_diagonal(&mix(&l)).unwrap().lo, 2);
        }
        assert_eq!(sdl_diagonal(&DickeMixture::dicke(4, 0).unwrap()).unwrap().rule, SdlRule::RankOne);
        assert_eq!(sdl_diagonal(&DickeMixture::dicke(4, 4).unwrap()).unwrap().lo, 1);
        // 1/2 D_3^0 + 1/2 D_3^2 has SDL 3
        assert_eq!(sdl_diagonal(&mix(&[0.5, 0.0, 0.5, 0.0])).unwrap().lo, 3);
    }

    #[test]
    fn closed_form_matches_linear_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 2..=6 {
            for k in 1..=n {
                let zeros: Vec<Option<usize>> =
                    std::iter::once(None).chain((0..k).map(Some)).collect();
                for zero in zeros {
                    let mut w: Vec<f64> = (0..=n)
                        .map(|i| if i <= k && Some(i) != zero { 0.1 + rng.random::<f64>() } else { 0.0 })
                        .collect();
                    let t: f64 = w.iter().sum();
                    w.iter_mut().for_each(|v| *v /= t);
                    let l = mix(&w);
                    if is_product_end(&l) {
                        continue;
                    }
                    let (lo, hi) = sdl_linear_systems(&l).unwrap();
                    let closed = truncated_mixture_sdl(n, k, zero);
                    assert_eq!((lo, hi), (closed, closed), "n={n} k={k} zero={zero:?} {w:?}");
                }
            }
        }
    }

    #[test]
    fn linear_systems_agree_with_full_level_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..300 {
            let n = rng.random_range(3..7);
            let w: Vec<f64> = (0..=n)
                .map(|_| if rng.random_bool(0.6) { rng.random::<f64>() + 0.05 } else { 0.0 })
                .collect();
            let t: f64 = w.iter().sum();
            if t == 0.0 {
                continue;
            }
            let l = mix(&w.iter().map(|v| v / t).collect::<Vec<_>>());
            if is_product_end(&l) {
                continue;
            }
            let (lo, hi) = sdl_linear_systems(&l).unwrap();
            assert_eq!(lo, hi);
            assert_eq!(lo == n, sdl_full_level(&l).holds, "{:?}", l.lambda());
            assert_eq!(sdl_diagonal(&l).unwrap().lo, lo, "{:?}", l.lambda());
        }
    }

    #[test]
    fn rank_criterion() {
        assert!(rank_criterion_sdl1(&PureVector::basis(3, 0).unwrap().density()).unwrap());
        let mixed = CMat::from_diagonal(&CVec::from_vec(vec![c(0.3, 0.0), c(0.7, 0.0)]));
        let zero = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let one = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        let rho = DenseState::from_matrix(3, qcore::kron(&zero, &qcore::kron(&mixed, &one))).unwrap();
        assert!(rank_criterion_sdl1(&rho).unwrap());
        assert!(!rank_criterion_sdl1(&PureVector::ghz(2).unwrap().density()).unwrap());
    }

    #[test]
    fn compatibility_examples() {
        for n in 3..7 {
            let ghz = PureVector::ghz(n).unwrap().density();
            let mut g = vec![0.0; n + 1];
            g[0] = 0.5;
            g[n] = 0.5;
            let sep = dense_from_diagonal(&mix(&g)).unwrap();
            let coll = all_k_subsets(n, n - 1).unwrap();
            assert!(check_compatibility(&sep, &ghz, &coll, 1e-12).unwrap().compatible);
            assert!(check_compatibility(&ghz, &ghz, &coll, 0.0).unwrap().compatible);
            let full = all_k_subsets(n, n).unwrap();
            assert!(!check_compatibility(&sep, &ghz, &full, 1e-12).unwrap().compatible);
        }
        let a = dense_from_diagonal(&mix(&[8.0 / 24.0, 11.0 / 24.0, 3.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0])).unwrap();
        let b = dense_from_diagonal(&mix(&[0.5, 0.0, 0.5, 0.0, 0.0])).unwrap();
        assert!(check_compatibility(&a, &b, &all_k_subsets(4, 2).unwrap(), 1e-12).unwrap().compatible);
        let r = check_compatibility(&a, &b, &all_k_subsets(4, 3).unwrap(), 1e-12).unwrap();
        assert!(!r.compatible && r.worst.is_some());
    }

    #[test]
    fn gap_pure_examples() {
        let g = gap_pure_family(5, c(0.94f64.sqrt(), 0.0)).unwrap();
        assert_eq!((g.edl, g.sdl, g.gap), (2, 4, 2));
        assert!(g.m0_min_eigenvalue < 0.0);
        assert!(g.compatibility_deviation < 1e-10);
        let g = gap_pure_family(6, c(0.97f64.sqrt(), 0.0)).unwrap();
        assert_eq!(g.gap, 3);
        // M0 = [[(n-2)a/n, a/n], [a/n, 1-a]]
        let a2 = 0.97;
        assert!((g.m0[(0, 0)] - 4.0 * a2 / 6.0).abs() < 1e-12);
        assert!((g.m0[(0, 1)] - a2 / 6.0).abs() < 1e-12);
        assert!((g.m0[(1, 1)] - (1.0 - a2)).abs() < 1e-12);
        assert!(matches!(gap_pure_family(5, c(0.5f64.sqrt(), 0.0)), Err(Error::BadAmplitude(_))));
    }

    #[test]
    fn gap_mixed_examples() {
        let g = gap_mixed_family(&mix(&[1.0 / 24.0, 1.0 / 3.0, 0.5, 1.0 / 12.0, 1.0 / 24.0])).unwrap();
        assert_eq!(g.gap, 2);
        let l3 = mix(&[1.0 / 12.0, 0.5, 1.0 / 3.0, 1.0 / 12.0]);
        let g = gap_mixed_family(&l3).unwrap();
        assert_eq!(g.gap, 1);
        assert_eq!(sdl_diagonal(&l3).unwrap().lo, 3);
        assert_eq!(edl_diagonal(&l3).value(), Some(2));
        assert!(matches!(
            gap_mixed_family(&mix(&[0.0, 0.5, 0.5, 0.0])),
            Err(Error::BadLambda(_))
        ));
    }

    #[test]
    fn gap_form_equals_marginal2_expression() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let n = rng.random_range(2..9);
            let l = random_mixture(n, &mut rng);
            let a = mixed_gap_form(&l);
            let b = marginal2_ppt(&l).unwrap().value;
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn exact_edl_matches_float() {
        let ex4 = ExactMixture::from_ratios(&[(1, 24), (1, 3), (1, 12), (1, 2), (1, 24)]).unwrap();
        assert_eq!(ex4.edl(), Some(3));
        assert_eq!(edl_diagonal(&ex4.to_float()).value(), Some(3));
        let ex5 = ExactMixture::from_ratios(&[(1, 2), (1, 3), (1, 12), (1, 24), (1, 24)]).unwrap();
        assert_eq!(ex5.edl(), Some(4));
        assert!(ExactMixture::from_ratios(&[(1, 2), (1, 3)]).is_err());
    }
}
