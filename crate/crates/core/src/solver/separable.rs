//! Fast solver for the separable part of the mapped operator,
//! D₁₁ ⊗ I + diag(1/H²) ⊗ D_ηη, with ghost-node Neumann rows at y₁ ∈ {0, l}
//! and η = 0 and a homogeneous Dirichlet row at η = 1. Used as the GMRES
//! preconditioner.
//!
//! D_ηη on m unknown rows has eigenvectors cos(θ_k j), θ_k = (k + ½)π/m,
//! with eigenvalues −4 sin²(θ_k/2)/h_η²; these are orthogonal under the
//! weights (½, 1, …, 1) with squared norm m/2.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SeparablePreconditioner {
    n1: usize,
    m: usize,
    h1: f64,
    /// cos(θ_k j), row k.
    modes: Vec<f64>,
    /// μ_k = −4 sin²(θ_k/2)/h_η².
    mu: Vec<f64>,
    inv_h2: Vec<f64>,
}

impl SeparablePreconditioner {
    /// `heights[i]` is H = εS at column i; `m` unknown rows with spacing `h_eta`.
    pub fn new(heights: &[f64], h1: f64, m: usize, h_eta: f64) -> Self {
        let mut modes = vec![0.0; m * m];
        let mut mu = vec![0.0; m];
        for k in 0..m {
            let theta = (k as f64 + 0.5) * PI / m as f64;
            for j in 0..m {
                modes[k * m + j] = (theta * j as f64).cos();
            }
            mu[k] = -4.0 * (0.5 * theta).sin().powi(2) / (h_eta * h_eta);
        }
        Self {
            n1: heights.len(),
            m,
            h1,
            modes,
            mu,
            inv_h2: heights.iter().map(|h| 1.0 / (h * h)).collect(),
        }
    }

    /// z = P⁻¹ r, both indexed i·m + j.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (n1, m) = (self.n1, self.m);
        // modal coefficients c[k][i]
        let mut c = vec![0.0; m * n1];
        for i in 0..n1 {
            let col = &r[i * m..(i + 1) * m];
            for k in 0..m {
                let row = &self.modes[k * m..(k + 1) * m];
                let mut s = 0.5 * col[0] * row[0];
                for j in 1..m {
                    s += col[j] * row[j];
                }
                c[k * n1 + i] = 2.0 / m as f64 * s;
            }
        }
        let inv = 1.0 / (self.h1 * self.h1);
        let mut upper = vec![0.0; n1];
        for k in 0..m {
            let rhs = &mut c[k * n1..(k + 1) * n1];
            // tridiagonal (D₁₁ + μ_k/H²) x = rhs by the Thomas algorithm
            let diag = |i: usize| -2.0 * inv + self.mu[k] * self.inv_h2[i];
            let sup = |i: usize| if i == 0 { 2.0 * inv } else { inv };
            let sub = |i: usize| if i == n1 - 1 { 2.0 * inv } else { inv };
            let mut d = diag(0);
            upper[0] = sup(0) / d;
            rhs[0] /= d;
            for i in 1..n1 {
                d = diag(i) - sub(i) * upper[i - 1];
                if i + 1 < n1 {
                    upper[i] = sup(i) / d;
                }
                rhs[i] = (rhs[i] - sub(i) * rhs[i - 1]) / d;
            }
            for i in (0..n1 - 1).rev() {
                rhs[i] -= upper[i] * rhs[i + 1];
            }
        }
        for i in 0..n1 {
            let out = &mut z[i * m..(i + 1) * m];
            out.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..m {
                let ck = c[k * n1 + i];
                let row = &self.modes[k * m..(k + 1) * m];
                for j in 0..m {
                    out[j] += ck * row[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // explicit separable operator for comparison
    fn apply_operator(q: &[f64], heights: &[f64], h1: f64, m: usize, he: f64) -> Vec<f64> {
        let n1 = heights.len();
        let at = |i: isize, j: isize| -> f64 {
            let i = if i < 0 {
                1
            } else if i as usize >= n1 {
                n1 as isize - 2
            } else {
                i
            } as usize;
            let j = if j < 0 { 1 } else { j } as usize;
            if j >= m {
                return 0.0;
            }
            q[i * m + j]
        };
        let mut out = vec![0.0; n1 * m];
        for i in 0..n1 as isize {
            for j in 0..m as isize {
                let q11 = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h1 * h1);
                let q22 = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (he * he);
                let h = heights[i as usize];
                out[i as usize * m + j as usize] = q11 + q22 / (h * h);
            }
        }
        out
    }

    #[test]
    fn inverts_the_separable_operator() {
        let (n1, m) = (13, 9);
        let heights: Vec<f64> = (0..n1).map(|i| 0.1 * (1.0 + 0.01 * i as f64)).collect();
        let (h1, he) = (1.0 / 12.0, 1.0 / 9.0);
        let p = SeparablePreconditioner::new(&heights, h1, m, he);
        let q: Vec<f64> = (0..n1 * m).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.1).collect();
        let r = apply_operator(&q, &heights, h1, m, he);
        let mut z = vec![0.0; n1 * m];
        p.apply(&r, &mut z);
        for (a, b) in z.iter().zip(&q) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn weighted_cosines_are_orthogonal() {
        let m = 7;
        let p = SeparablePreconditioner::new(&[1.0], 1.0, m, 1.0);
        for k in 0..m {
            for l in 0..m {
                let mut s = 0.5 * p.modes[k * m] * p.modes[l * m];
                for j in 1..m {
                    s += p.modes[k * m + j] * p.modes[l * m + j];
                }
                let expect = if k == l { m as f64 / 2.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }
}
