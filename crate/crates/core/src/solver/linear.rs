//! Sparse matrices, a banded LU with partial pivoting and restarted GMRES.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row (column, value) lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    /// max row sum of |a_ij|.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    /// (lower, upper) bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[k];
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factors of a banded matrix, LINPACK-style storage with room for
/// pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Bytes needed to factor a matrix with the given shape.
    pub fn memory_estimate(n: usize, kl: usize, ku: usize) -> usize {
        n * (2 * kl + ku + 1) * std::mem::size_of::<f64>()
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                data[i * width + j + kl - i] += a.vals[k];
            }
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data,
            pivots: vec![0; n],
        };
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::LinearSolver(format!("singular band matrix at pivot {k}")));
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for r in k + 1..=last_row {
                let ir = self.idx(r, k);
                let l = self.data[ir] / pivot;
                self.data[ir] = l;
                if l == 0.0 {
                    continue;
                }
                let base_r = self.idx(r, k + 1);
                let base_k = self.idx(k, k + 1);
                let len = last_col - k;
                for off in 0..len {
                    self.data[base_r + off] -= l * self.data[base_k + off];
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= self.data[self.idx(r, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned restarted GMRES. `precond(r, z)` applies M⁻¹.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    mut precond: impl FnMut(&[f64], &mut [f64]),
    tolerance: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<IterativeReport> {
    let n = a.n;
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(IterativeReport {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut iterations = 0;
    loop {
        a.matvec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        let rel = beta / b_norm;
        if rel <= tolerance {
            return Ok(IterativeReport {
                iterations,
                relative_residual: rel,
            });
        }
        if iterations >= max_iterations {
            return Err(Error::LinearSolver(format!(
                "GMRES stalled at relative residual {rel:.3e} after {iterations} iterations"
            )));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            precond(&v[k], &mut z);
            a.matvec(&z, &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hjk = dot(&w, vj);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * vj[i];
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            if g[k + 1].abs() / b_norm <= tolerance * 0.5 || iterations >= max_iterations || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / wn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                update[i] += yj * v[j][i];
            }
        }
        precond(&update, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 4.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -2.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0)], vec![(1, 1.0)]]);
        assert_eq!(a.vals, vec![3.0, 1.0]);
    }

    #[test]
    fn band_lu_solves_with_pivoting() {
        // zero leading diagonal forces a row exchange
        let a = CsrMatrix::from_rows(vec![
            vec![(0, 0.0), (1, 2.0)],
            vec![(0, 1.0), (1, 1.0), (2, 1.0)],
            vec![(1, 3.0), (2, 1.0), (3, 1.0)],
            vec![(2, 1.0), (3, 5.0)],
        ]);
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let mut b = vec![0.0; 4];
        a.matvec(&x_true, &mut b);
        let lu = BandLu::factor(&a).unwrap();
        lu.solve(&mut b);
        for (x, t) in b.iter().zip(x_true) {
            assert!((x - t).abs() < 1e-12);
        }
    }

    #[test]
    fn band_lu_rejects_singular() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        assert!(BandLu::factor(&a).is_err());
    }

    #[test]
    fn gmres_matches_direct_solve() {
        let a = tridiagonal(200);
        let x_true: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; 200];
        a.matvec(&x_true, &mut b);
        let mut x = vec![0.0; 200];
        let rep = gmres(&a, &b, &mut x, |r, z| z.copy_from_slice(r), 1e-12, 30, 1000).unwrap();
        assert!(rep.relative_residual <= 1e-12);
        for (x, t) in x.iter().zip(&x_true) {
            assert!((x - t).abs() < 1e-9);
        }
    }

    #[test]
    fn gmres_with_exact_preconditioner_converges_in_one_step() {
        let a = tridiagonal(50);
        let lu = BandLu::factor(&a).unwrap();
        let b: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let mut x = vec![0.0; 50];
        let rep = gmres(
            &a,
            &b,
            &mut x,
            |r, z| {
                z.copy_from_slice(r);
                lu.solve(z);
            },
            1e-12,
            10,
            10,
        )
        .unwrap();
        assert!(rep.iterations <= 1);
    }
}
