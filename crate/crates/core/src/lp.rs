//! Dense two-phase simplex for the small polytopes that arise from the
//! diagonal marginal equations. Bland's rule keeps pivoting deterministic
//! and cycle-free.

/// Result of `maximize c.x subject to A x <= b, x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// reduced profits, last entry holds minus the objective value
    obj: Vec<f64>,
    basis: Vec<usize>,
    tol: f64,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations over the columns allowed by `usable`.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, usable: &dyn Fn(usize) -> bool) -> bool {
        let rhs = self.obj.len() - 1;
        loop {
            let entering = (0..rhs).find(|&j| usable(j) && self.obj[j] > self.tol);
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > self.tol {
                    let ratio = row[rhs] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - self.tol
                                || (ratio <= br + self.tol && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// Maximizes `c.x` over `{x >= 0 : A x <= b}` with a two-phase tableau.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64], tol: f64) -> LpOutcome {
    let m = a.len();
    let nv = c.len();
    assert_eq!(b.len(), m, "constraint matrix and bound vector differ in length");
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    let ncols = nv + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        assert_eq!(a[i].len(), nv, "ragged constraint matrix");
        let mut row = vec![0.0; ncols + 1];
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            row[j] = sign * a[i][j];
        }
        row[nv + i] = sign;
        row[ncols] = sign * b[i];
        if let Some(p) = negative.iter().position(|&r| r == i) {
            row[nv + m + p] = 1.0;
            basis.push(nv + m + p);
        } else {
            basis.push(nv + i);
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![0.0; ncols + 1],
        basis,
        tol,
    };

    if n_art > 0 {
        // phase one: maximize minus the sum of artificials
        for j in nv + m..ncols {
            t.obj[j] = -1.0;
        }
        for i in 0..m {
            if t.basis[i] >= nv + m {
                let row = t.rows[i].clone();
                for (o, v) in t.obj.iter_mut().zip(&row) {
                    *o += v;
                }
            }
        }
        t.optimize(&|_| true);
        if t.obj[ncols] > tol * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>()) {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= nv + m {
                if let Some(col) = (0..nv + m).find(|&j| t.rows[i][j].abs() > tol) {
                    t.pivot(i, col);
                }
            }
        }
    }

    // phase two
    t.obj = vec![0.0; ncols + 1];
    t.obj[..nv].copy_from_slice(c);
    for i in 0..m {
        let bj = t.basis[i];
        if bj < nv && c[bj] != 0.0 {
            let f = c[bj];
            let row = t.rows[i].clone();
            for (o, v) in t.obj.iter_mut().zip(&row) {
                *o -= f * v;
            }
        }
    }
    let art_start = nv + m;
    if !t.optimize(&|j| j < art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; nv];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < nv {
            x[bj] = t.rows[i][ncols];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}
