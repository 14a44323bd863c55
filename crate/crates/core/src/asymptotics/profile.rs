//! The limit profile: (S w₀')' = γS_t − χ₁φ₂ on (0, l) with
//! w₀'(0) = −⟨⟨χ₂φ₁⟩⟩_{𝒮₀}, w₀'(l) = ⟨⟨χ₂φ₃⟩⟩_{𝒮_l}, normalised to zero
//! arc-length mean over the free boundary.
//!
//! The equation is integrated once in closed form,
//! S w₀'(y₁) = 𝒮₀ w₀'(0) + ∫₀^{y₁}(γS_t − χ₁φ₂), and once more by
//! cumulative quadrature; the right condition is then a residual check.

use crate::asymptotics::evolution::FreeBoundaryEvolution;
use crate::error::{Error, Result};
use crate::model::uniform_grid;
use crate::quadrature::{gauss_legendre, gauss_legendre_points};

/// Tolerance on the emergent right boundary condition.
pub const RIGHT_BC_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LimitProfile {
    pub t: f64,
    pub eps: f64,
    pub y1: Vec<f64>,
    /// 𝔴₀ = w₀ − (Γ-mean of w₀).
    pub w0: Vec<f64>,
    pub w0_prime: Vec<f64>,
    pub w0_second: Vec<f64>,
    pub gamma_mean: f64,
    pub h0: f64,
    pub s: Vec<f64>,
    pub s_y: Vec<f64>,
    pub s_t: Vec<f64>,
    /// χ₁φ₂ at the nodes.
    pub bottom: Vec<f64>,
    /// w₀'(l) − ⟨⟨χ₂φ₃⟩⟩_{𝒮_l}.
    pub right_bc_residual: f64,
}

/// Cubic Hermite interpolation on a uniform grid.
pub(crate) fn hermite(x: &[f64], v: &[f64], dv: &[f64], at: f64) -> (f64, f64) {
    let n = x.len();
    let h = x[1] - x[0];
    let k = (((at - x[0]) / h).floor().max(0.0) as usize).min(n - 2);
    let s = ((at - x[k]) / h).clamp(0.0, 1.0);
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * v[k] + h10 * h * dv[k] + h01 * v[k + 1] + h11 * h * dv[k + 1];
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    let slope = d00 * v[k] + d10 * dv[k] + d01 * v[k + 1] + d11 * dv[k + 1];
    (value, slope)
}

pub(crate) fn linear(x: &[f64], v: &[f64], at: f64) -> f64 {
    let n = x.len();
    let h = x[1] - x[0];
    let k = (((at - x[0]) / h).floor().max(0.0) as usize).min(n - 2);
    let s = ((at - x[k]) / h).clamp(0.0, 1.0);
    v[k] * (1.0 - s) + v[k + 1] * s
}

pub fn solve_limit_profile(evolution: &FreeBoundaryEvolution, t: f64, n: usize, eps: f64) -> Result<LimitProfile> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "profile grid needs at least 3 nodes, got {n}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let flux = &evolution.flux;
    flux.check_time(t)?;
    let l = flux.length;
    let gamma = flux.gamma;
    let y1 = uniform_grid(0.0, l, n);
    let h0 = evolution.h0(t)?;
    let (s0, sl) = evolution.corner_heights(t)?;
    if s0 <= 0.0 || sl <= 0.0 {
        return Err(Error::GeometryCollapse(s0.min(sl)));
    }
    // the χ₂ supports lie inside (0, 𝒮), so the middle values are (1/𝒮)∫₀¹
    let left_mid = flux.left_integral(t) / s0;
    let right_mid = flux.right_integral(t) / sl;
    let w0_prime_0 = -left_mid;

    let s: Vec<f64> = y1.iter().map(|&y| evolution.s_unchecked(y, t)).collect();
    let s_y: Vec<f64> = y1.iter().map(|&y| evolution.s_y_unchecked(y, t)).collect();
    let bottom: Vec<f64> = y1.iter().map(|&y| flux.bottom_density(y, t)).collect();
    let s_t: Vec<f64> = bottom.iter().map(|&g| (g + h0) / gamma).collect();
    if let Some(&m) = s.iter().find(|&&v| v <= 0.0) {
        return Err(Error::GeometryCollapse(m));
    }

    // first integral: F(y) = ∫₀^y (γS_t − χ₁φ₂), cell by cell
    let source = |y: f64| {
        let g = flux.bottom_density(y, t);
        gamma * (g + h0) / gamma - g
    };
    let mut flux_integral = vec![0.0; n];
    for i in 1..n {
        flux_integral[i] = flux_integral[i - 1] + gauss_legendre(source, y1[i - 1], y1[i], 1);
    }
    let w0_prime: Vec<f64> = (0..n).map(|i| (s0 * w0_prime_0 + flux_integral[i]) / s[i]).collect();
    let w0_second: Vec<f64> = (0..n)
        .map(|i| (gamma * s_t[i] - bottom[i] - s_y[i] * w0_prime[i]) / s[i])
        .collect();
    let right_bc_residual = w0_prime[n - 1] - right_mid;
    if !right_bc_residual.is_finite() || right_bc_residual.abs() > RIGHT_BC_TOLERANCE * (1.0 + right_mid.abs()) {
        return Err(Error::Solvability(format!(
            "right boundary condition misses by {right_bc_residual:.3e} at t = {t}"
        )));
    }

    // second integral: w₀(y) = ∫₀^y w₀', with w₀' evaluated from the closed form inside cells
    let w0p_at = |y: f64, base: f64, y_left: f64| {
        let partial = gauss_legendre(source, y_left, y, 1);
        (s0 * w0_prime_0 + base + partial) / evolution.s_unchecked(y, t)
    };
    let mut w0 = vec![0.0; n];
    for i in 1..n {
        let (a, b) = (y1[i - 1], y1[i]);
        w0[i] = w0[i - 1] + gauss_legendre(|y| w0p_at(y, flux_integral[i - 1], a), a, b, 1);
    }

    // arc-length mean over Γ with weight √(1 + ε²S_y²)
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n {
        for (y, w) in gauss_legendre_points(y1[i - 1], y1[i], 1) {
            let sy = evolution.s_y_unchecked(y, t);
            let weight = (1.0 + eps * eps * sy * sy).sqrt();
            let (v, _) = hermite(&y1, &w0, &w0_prime, y);
            num += w * weight * v;
            den += w * weight;
        }
    }
    let gamma_mean = num / den;
    for v in &mut w0 {
        *v -= gamma_mean;
    }
    Ok(LimitProfile {
        t,
        eps,
        y1,
        w0,
        w0_prime,
        w0_second,
        gamma_mean,
        h0,
        s,
        s_y,
        s_t,
        bottom,
        right_bc_residual,
    })
}

impl LimitProfile {
    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn length(&self) -> f64 {
        self.y1[self.n() - 1]
    }

    /// 𝔴₀(y₁) by cubic Hermite interpolation.
    pub fn eval(&self, y1: f64) -> f64 {
        hermite(&self.y1, &self.w0, &self.w0_prime, y1).0
    }

    /// 𝔴₀'(y₁), Hermite interpolation of (w₀', w₀'').
    pub fn eval_prime(&self, y1: f64) -> f64 {
        hermite(&self.y1, &self.w0_prime, &self.w0_second, y1).0
    }

    pub fn eval_second(&self, y1: f64) -> f64 {
        linear(&self.y1, &self.w0_second, y1)
    }

    pub fn s_at(&self, y1: f64) -> f64 {
        hermite(&self.y1, &self.s, &self.s_y, y1).0
    }

    /// S w₀' at l minus at 0, which should equal l·h₀.
    pub fn flux_balance(&self) -> f64 {
        let n = self.n();
        self.s[n - 1] * self.w0_prime[n - 1] - self.s[0] * self.w0_prime[0]
    }

    /// Γ-mean of 𝔴₀ recomputed by the trapezoid rule on the nodes.
    pub fn residual_mean(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..self.n() {
            let dy = self.y1[i] - self.y1[i - 1];
            let wt = |k: usize| (1.0 + self.eps * self.eps * self.s_y[k] * self.s_y[k]).sqrt();
            num += 0.5 * dy * (wt(i - 1) * self.w0[i - 1] + wt(i) * self.w0[i]);
            den += 0.5 * dy * (wt(i - 1) + wt(i));
        }
        num / den
    }
}
