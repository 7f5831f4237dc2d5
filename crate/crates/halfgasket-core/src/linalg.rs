//! Linear algebra at desk scale: dense Gaussian elimination, sparse
//! elimination with minimum-degree pivoting (for graph Laplacian systems,
//! exact over rationals), a cyclic Jacobi eigensolver for small symmetric
//! float matrices, and exact rank computation.

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use std::collections::BTreeMap;

/// Solve the dense system `A x = b` by Gaussian elimination with
/// partial (largest-magnitude) pivoting; exact over rationals.
pub fn solve_dense<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(Error::Domain("dense solve needs a square system".into()));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot][col].is_zero() {
            return Err(Error::Domain("singular matrix in dense solve".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        let pivot_row = a[col].clone();
        for i in (col + 1)..n {
            if a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone() * inv.clone();
            for (t, p) in a[i][col..].iter_mut().zip(&pivot_row[col..]) {
                *t -= f.clone() * p.clone();
            }
            let t = f * b[col].clone();
            b[i] -= t;
        }
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in (i + 1)..n {
            acc -= a[i][j].clone() * x[j].clone();
        }
        x[i] = acc / a[i][i].clone();
    }
    Ok(x)
}

/// A sparse linear system stored by rows. The solver assumes a
/// structurally symmetric pattern (entry (i,j) present iff (j,i) is),
/// which holds for every graph Laplacian system built in this crate.
#[derive(Debug, Clone)]
pub struct SparseSystem<S> {
    rows: Vec<BTreeMap<usize, S>>,
    rhs: Vec<S>,
}

impl<S: Scalar> SparseSystem<S> {
    pub fn new(n: usize) -> Self {
        SparseSystem { rows: vec![BTreeMap::new(); n], rhs: vec![S::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add(&mut self, i: usize, j: usize, v: S) {
        let slot = self.rows[i].entry(j).or_insert_with(S::zero);
        *slot += v;
        if slot.is_zero() {
            self.rows[i].remove(&j);
        }
    }

    pub fn add_rhs(&mut self, i: usize, v: S) {
        self.rhs[i] += v;
    }

    /// Solve by elimination in minimum-degree order (deterministic:
    /// ties break toward the smallest index). Exact over rationals; the
    /// structure of level-graph systems keeps fill-in low.
    pub fn solve(mut self) -> Result<Vec<S>> {
        let n = self.rows.len();
        // x_p = rhs'_p − Σ_j coef_j x_j, recorded in elimination order.
        let mut eliminated: Vec<(usize, BTreeMap<usize, S>, S)> = Vec::with_capacity(n);
        let mut done = vec![false; n];
        let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(usize, usize)>> =
            (0..n).map(|i| std::cmp::Reverse((self.rows[i].len(), i))).collect();
        while let Some(std::cmp::Reverse((deg, p))) = heap.pop() {
            if done[p] || self.rows[p].len() != deg {
                continue; // stale heap entry
            }
            done[p] = true;
            let mut row = std::mem::take(&mut self.rows[p]);
            let diag = row.remove(&p).filter(|d| !d.is_zero()).ok_or_else(|| {
                Error::Domain(format!("singular sparse system at unknown {p}"))
            })?;
            let inv = diag.recip();
            let norm_row: BTreeMap<usize, S> =
                row.iter().map(|(&j, c)| (j, c.clone() * inv.clone())).collect();
            let norm_rhs = self.rhs[p].clone() * inv.clone();
            // Substitute x_p away from every row that references it.
            let touching: Vec<usize> = row.keys().copied().collect();
            for &i in &touching {
                if done[i] {
                    continue;
                }
                if let Some(c) = self.rows[i].remove(&p) {
                    for (&j, v) in &norm_row {
                        let slot = self.rows[i].entry(j).or_insert_with(S::zero);
                        *slot -= c.clone() * v.clone();
                        if slot.is_zero() {
                            self.rows[i].remove(&j);
                        }
                    }
                    let t = c * norm_rhs.clone();
                    self.rhs[i] -= t;
                    heap.push(std::cmp::Reverse((self.rows[i].len(), i)));
                }
            }
            eliminated.push((p, norm_row, norm_rhs));
        }
        if eliminated.len() != n {
            return Err(Error::Domain("sparse system is structurally singular".into()));
        }
        let mut x = vec![S::zero(); n];
        for (p, row, rhs) in eliminated.into_iter().rev() {
            let mut acc = rhs;
            for (j, c) in row {
                acc -= c * x[j].clone();
            }
            x[p] = acc;
        }
        Ok(x)
    }
}

/// Exact rank of a rational matrix (Gaussian elimination).
pub fn rational_rank(mut a: Vec<Vec<Rational>>) -> usize {
    use num::Zero;
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot) = (row..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, pivot);
        let inv = a[row][col].clone().recip();
        let pivot_row = a[row].clone();
        for below in a.iter_mut().skip(row + 1) {
            if below[col].is_zero() {
                continue;
            }
            let f = below[col].clone() * inv.clone();
            for (t, p) in below[col..].iter_mut().zip(&pivot_row[col..]) {
                *t -= f.clone() * p.clone();
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Eigenvalues (ascending) and an orthonormal eigenbasis (columns) of a
/// symmetric matrix, by the cyclic Jacobi method.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n == 0 {
        return (Vec::new(), v);
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for (i, row) in a.iter().enumerate() {
            for x in &row[(i + 1)..] {
                off += x * x;
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                let (lo, hi) = a.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals: Vec<f64> = idx.iter().map(|&i| a[i][i]).collect();
    let vecs: Vec<Vec<f64>> = (0..n)
        .map(|r| idx.iter().map(|&c| v[r][c]).collect())
        .collect();
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn dense_solve_exact() {
        let a = vec![
            vec![q(2, 1), q(1, 1), q(0, 1)],
            vec![q(1, 1), q(3, 1), q(1, 1)],
            vec![q(0, 1), q(1, 1), q(4, 1)],
        ];
        let x = vec![q(1, 3), q(-2, 1), q(5, 7)];
        let b: Vec<Rational> = (0..3)
            .map(|i| (0..3).map(|j| a[i][j].clone() * x[j].clone()).sum())
            .collect();
        assert_eq!(solve_dense(a, b).unwrap(), x);
    }

    #[test]
    fn dense_solve_detects_singularity() {
        let a = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(solve_dense(a, vec![q(1, 1), q(2, 1)]).is_err());
    }

    #[test]
    fn sparse_matches_dense() {
        // A small Laplacian-like symmetric diagonally dominant system.
        let n = 12;
        let mut sys = SparseSystem::<Rational>::new(n);
        let mut dense = vec![vec![Rational::zero(); n]; n];
        let mut rhs = Vec::new();
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            sys.add(i, i, q(9, 2));
            dense[i][i] = q(9, 2);
            for d in [1usize, 3] {
                let j = (i + d) % n;
                sys.add(i, j, q(-1, 1));
                sys.add(j, i, q(-1, 1));
                dense[i][j] += q(-1, 1);
                dense[j][i] += q(-1, 1);
            }
            let b = q((i as i64 * 7 % 5) - 2, i as i64 + 1);
            sys.add_rhs(i, b.clone());
            rhs.push(b);
        }
        let xs = sys.solve().unwrap();
        let xd = solve_dense(dense, rhs).unwrap();
        assert_eq!(xs, xd);
    }

    #[test]
    fn rank_counts_pivots() {
        let a = vec![
            vec![q(1, 1), q(2, 1), q(3, 1)],
            vec![q(2, 1), q(4, 1), q(6, 1)],
            vec![q(0, 1), q(1, 1), q(1, 1)],
        ];
        assert_eq!(rational_rank(a), 2);
        assert_eq!(rational_rank(vec![vec![Rational::zero(); 3]; 2]), 0);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ];
        let (vals, vecs) = jacobi_eigen(a.clone());
        let expect = [2.0 - 2.0f64.sqrt(), 2.0, 2.0 + 2.0f64.sqrt()];
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        // Residual ‖A v − λ v‖ per eigenpair.
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * vecs[j][k]).sum();
                assert!((av - vals[k] * vecs[i][k]).abs() < 1e-12);
            }
        }
    }
}
