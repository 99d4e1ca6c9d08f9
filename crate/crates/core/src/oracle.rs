//! Brute-force reference implementations for property tests.
//!
//! Nothing here calls into the fast paths it checks: dense embeddings are
//! written entry by entry, traces are loop nests over index pairs, and
//! connectivity uses its own breadth-first search.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qcore::{self, c, CMat, DenseState, Subset};
use crate::symmetric::{DickeMixture, SymmetricCoeffs};

const MAX_ORACLE_QUBITS: usize = 8;

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for t in 0..k {
        r = r * (n - t) as f64 / (t + 1) as f64;
    }
    r.round()
}

fn cap(n: usize) -> Result<()> {
    if n > MAX_ORACLE_QUBITS {
        Err(Error::TooLarge(n))
    } else {
        Ok(())
    }
}

/// `sum_i lambda_i |D_n^i><D_n^i|` written entrywise.
pub fn dense_from_diagonal(lam: &DickeMixture) -> Result<DenseState> {
    let n = lam.n();
    cap(n)?;
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for x in 0..dim {
        for y in 0..dim {
            let wx = x.count_ones() as usize;
            if wx == y.count_ones() as usize {
                m[(x, y)] = c(lam.lambda()[wx] / choose(n, wx), 0.0);
            }
        }
    }
    Ok(DenseState::from_matrix_unchecked(n, m))
}

/// `sum_ij a_ij |D_n^i><D_n^j|` written entrywise.
pub fn dense_from_symmetric(a: &SymmetricCoeffs) -> Result<DenseState> {
    let n = a.n();
    cap(n)?;
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for x in 0..dim {
        let wx = x.count_ones() as usize;
        for y in 0..dim {
            let wy = y.count_ones() as usize;
            m[(x, y)] = a.matrix()[(wx, wy)] / (choose(n, wx) * choose(n, wy)).sqrt();
        }
    }
    Ok(DenseState::from_matrix_unchecked(n, m))
}

/// Reduced state on `keep` by summing `rho[x, y]` over all index pairs that
/// agree on the traced-out particles.
pub fn brute_marginal(rho: &DenseState, keep: &Subset) -> Result<DenseState> {
    let n = rho.n();
    if keep.n() != n {
        return Err(Error::DimMismatch(format!("subset over {} particles, state over {n}", keep.n())));
    }
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    let kept: Vec<usize> = (1..=n).filter(|&j| keep.contains(j)).collect();
    let bit = |idx: usize, particle: usize| (idx >> (n - particle)) & 1;
    let reduce = |idx: usize| kept.iter().fold(0usize, |acc, &p| (acc << 1) | bit(idx, p));
    let rest = |idx: usize| {
        (1..=n)
            .filter(|&p| !keep.contains(p))
            .fold(0usize, |acc, p| (acc << 1) | bit(idx, p))
    };
    let dk = 1usize << kept.len();
    let mut out = CMat::zeros(dk, dk);
    let dim = 1usize << n;
    for x in 0..dim {
        for y in 0..dim {
            if rest(x) == rest(y) {
                out[(reduce(x), reduce(y))] += rho.matrix()[(x, y)];
            }
        }
    }
    Ok(DenseState::from_matrix_unchecked(kept.len(), out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrutePpt {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

/// Transposes the particles in `s` entry by entry and checks the spectrum.
pub fn brute_ppt(rho: &DenseState, s: &Subset, tol: f64) -> Result<BrutePpt> {
    let n = rho.n();
    cap(n)?;
    if s.n() != n {
        return Err(Error::DimMismatch(format!("subset over {} particles, state over {n}", s.n())));
    }
    let dim = 1usize << n;
    let mut flip = 0usize;
    for p in 1..=n {
        if s.contains(p) {
            flip |= 1 << (n - p);
        }
    }
    let m = rho.matrix();
    let pt = DMatrix::from_fn(dim, dim, |x, y| {
        // swap the bits of x and y that belong to s
        let d = (x ^ y) & flip;
        m[(x ^ d, y ^ d)]
    });
    let min = qcore::eigvalsh(&pt)
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(BrutePpt {
        ppt: min >= -tol,
        min_eigenvalue: min,
    })
}

/// True iff `rho` commutes with every adjacent transposition of particles.
pub fn is_swap_invariant(rho: &DenseState, tol: f64) -> bool {
    let n = rho.n();
    let dim = 1usize << n;
    let m = rho.matrix();
    (1..n).all(|p| {
        let (hi, lo) = (1usize << (n - p), 1usize << (n - p - 1));
        let swap = |x: usize| {
            let (a, b) = (x & hi != 0, x & lo != 0);
            if a == b {
                x
            } else {
                x ^ hi ^ lo
            }
        };
        (0..dim).all(|x| (0..dim).all(|y| (m[(swap(x), swap(y))] - m[(x, y)]).norm() <= tol))
    })
}

fn covers_connected(n: usize, edges: &[u32]) -> bool {
    let all = (1u32 << n) - 1;
    if edges.iter().fold(0, |a, e| a | e) != all {
        return false;
    }
    let mut reached = edges[0];
    let mut used = vec![false; edges.len()];
    used[0] = true;
    loop {
        let mut grew = false;
        for (i, e) in edges.iter().enumerate() {
            if !used[i] && e & reached != 0 {
                used[i] = true;
                reached |= e;
                grew = true;
            }
        }
        if !grew {
            return reached == all;
        }
    }
}

fn combos(pool: &[u32], size: usize, start: usize, cur: &mut Vec<u32>, hit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    if cur.len() == size {
        return hit(cur);
    }
    for i in start..pool.len() {
        cur.push(pool[i]);
        if combos(pool, size, i + 1, cur, hit) {
            return true;
        }
        cur.pop();
    }
    false
}

/// Fewest k-subsets of `{1..n}` forming a connected hypergraph that covers
/// every vertex, by enumeration in order of increasing count.
pub fn exhaustive_min_connected_cover(n: usize, k: usize) -> Result<usize> {
    if n > 7 || n == 0 {
        return Err(Error::TooLarge(n));
    }
    if k == 0 || k > 4 || k > n {
        return Err(Error::BadK { n, k });
    }
    let pool: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() as usize == k).collect();
    for size in 1..=pool.len() {
        if combos(&pool, size, 0, &mut Vec::new(), &mut |e| covers_connected(n, e)) {
            return Ok(size);
        }
    }
    // k == 1 with n > 1: singletons never connect
    Err(Error::BadK { n, k })
}
