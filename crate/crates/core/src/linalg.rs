//! Exact linear algebra over [`Scalar`]: dense inverses and an incremental sparse solver.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Scalar::zero(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !bk[j].is_zero() {
                    out[i][j] += &(&a[i][k] * &bk[j]);
                }
            }
        }
    }
    out
}

pub fn is_antisymmetric(m: &Matrix) -> bool {
    let n = m.len();
    m.iter().all(|r| r.len() == n)
        && (0..n).all(|i| (0..n).all(|j| (&m[i][j] + &m[j][i]).is_zero()))
}

/// Gauss–Jordan inverse.
pub fn invert(m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMatrix("matrix is not square".into()));
    }
    let mut a: Matrix = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::NotInvertible)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = a[col][col].inv().unwrap();
        for j in 0..n {
            a[col][j] = &a[col][j] * &s;
            inv[col][j] = &inv[col][j] * &s;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= &t;
                let t = &f * &inv[col][j];
                inv[r][j] -= &t;
            }
        }
    }
    Ok(inv)
}

/// Sparse row: column index to nonzero coefficient.
pub type SparseRow = BTreeMap<usize, Scalar>;

/// Exact incremental elimination for `Σ_j a_j t_j = b` systems.
///
/// Equations are reduced against the stored pivots as they arrive, so a
/// system with many redundant equations stays small.
#[derive(Default, Clone)]
pub struct SparseSolver {
    // pivot column -> (row normalised so the pivot coefficient is 1, rhs)
    pivots: BTreeMap<usize, (SparseRow, Scalar)>,
    inconsistent: bool,
}

impl SparseSolver {
    pub fn new() -> Self {
        SparseSolver::default()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, mut row: SparseRow, mut rhs: Scalar) -> (SparseRow, Scalar) {
        loop {
            let hit = row.iter().find(|(c, _)| self.pivots.contains_key(c)).map(|(c, v)| (*c, v.clone()));
            let Some((c, f)) = hit else { break };
            let (prow, prhs) = &self.pivots[&c];
            for (j, v) in prow {
                let e = row.entry(*j).or_default();
                *e -= &(&f * v);
                if e.is_zero() {
                    row.remove(j);
                }
            }
            rhs -= &(&f * prhs);
        }
        (row, rhs)
    }

    /// Add one equation. Returns `false` if it contradicts the previous ones.
    pub fn add_equation(&mut self, row: SparseRow, rhs: Scalar) -> bool {
        let row: SparseRow = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let (row, rhs) = self.reduce(row, rhs);
        let Some((&pc, pv)) = row.iter().next() else {
            if !rhs.is_zero() {
                self.inconsistent = true;
                return false;
            }
            return true;
        };
        let s = pv.inv().unwrap();
        let row: SparseRow = row.iter().map(|(j, v)| (*j, v * &s)).collect();
        let rhs = &rhs * &s;
        // keep pivots fully reduced so back substitution is a single pass
        let keys: Vec<usize> = self.pivots.keys().copied().collect();
        for k in keys {
            let (prow, prhs) = self.pivots.get_mut(&k).unwrap();
            if let Some(f) = prow.get(&pc).cloned() {
                for (j, v) in &row {
                    let e = prow.entry(*j).or_default();
                    *e -= &(&f * v);
                    if e.is_zero() {
                        prow.remove(j);
                    }
                }
                *prhs -= &(&f * &rhs);
            }
        }
        self.pivots.insert(pc, (row, rhs));
        true
    }

    /// A particular solution with all free variables set to zero.
    pub fn solution(&self) -> Option<BTreeMap<usize, Scalar>> {
        if self.inconsistent {
            return None;
        }
        Some(self.pivots.iter().filter(|(_, (_, r))| !r.is_zero()).map(|(c, (_, r))| (*c, r.clone())).collect())
    }
}
