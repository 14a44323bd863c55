//! The second-order corrector u₂(y₁, ξ₂) on 0 ≤ ξ₂ ≤ S(y₁, t):
//!
//! ∂²u₂/∂ξ₂² = −w₀'', ∂u₂/∂ξ₂(·, 0) = −χ₁φ₂, u₂(·, S) = 0,
//!
//! so u₂ = A ξ₂² + B ξ₂ + C with A = −w₀''/2, B = −χ₁φ₂,
//! C = w₀''S²/2 + χ₁φ₂ S. The top slope −w₀''S − χ₁φ₂ must equal
//! S_{y₁}w₀' − γS_t, which is the solvability identity of the profile.

use crate::asymptotics::profile::{linear, LimitProfile};
use crate::error::{Error, Result};
use crate::model::{first_derivative, second_derivative};

/// Tolerance of the top-slope identity.
pub const TOP_SLOPE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CorrectorField {
    pub t: f64,
    pub y1: Vec<f64>,
    pub s: Vec<f64>,
    pub coef_a: Vec<f64>,
    pub coef_b: Vec<f64>,
    pub coef_c: Vec<f64>,
    // y₁-derivatives of the coefficients by finite differences
    da: Vec<f64>,
    db: Vec<f64>,
    dc: Vec<f64>,
    dda: Vec<f64>,
    ddb: Vec<f64>,
    ddc: Vec<f64>,
    /// max over nodes of |∂u₂/∂ξ₂(S) − (S_{y₁}w₀' − γS_t)|.
    pub top_slope_residual: f64,
}

pub fn solve_corrector(profile: &LimitProfile, gamma: f64) -> Result<CorrectorField> {
    let n = profile.n();
    let mut coef_a = vec![0.0; n];
    let mut coef_b = vec![0.0; n];
    let mut coef_c = vec![0.0; n];
    let mut residual = 0.0f64;
    for i in 0..n {
        let (s, w2, g) = (profile.s[i], profile.w0_second[i], profile.bottom[i]);
        coef_a[i] = -0.5 * w2;
        coef_b[i] = -g;
        coef_c[i] = 0.5 * w2 * s * s + g * s;
        let top = 2.0 * coef_a[i] * s + coef_b[i];
        let expected = profile.s_y[i] * profile.w0_prime[i] - gamma * profile.s_t[i];
        residual = residual.max((top - expected).abs());
    }
    if !residual.is_finite() || residual > TOP_SLOPE_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "corrector top-slope identity violated by {residual:.3e} at t = {}",
            profile.t
        )));
    }
    let h = profile.y1[1] - profile.y1[0];
    Ok(CorrectorField {
        t: profile.t,
        y1: profile.y1.clone(),
        s: profile.s.clone(),
        da: first_derivative(&coef_a, h),
        db: first_derivative(&coef_b, h),
        dc: first_derivative(&coef_c, h),
        dda: second_derivative(&coef_a, h),
        ddb: second_derivative(&coef_b, h),
        ddc: second_derivative(&coef_c, h),
        coef_a,
        coef_b,
        coef_c,
        top_slope_residual: residual,
    })
}

impl CorrectorField {
    fn quad(a: f64, b: f64, c: f64, xi: f64) -> f64 {
        (a * xi + b) * xi + c
    }

    /// u₂(y₁, ξ₂); the quadratic in ξ₂ extends naturally above S.
    pub fn eval(&self, y1: f64, xi: f64) -> f64 {
        let y = &self.y1;
        Self::quad(
            linear(y, &self.coef_a, y1),
            linear(y, &self.coef_b, y1),
            linear(y, &self.coef_c, y1),
            xi,
        )
    }

    pub fn d_xi(&self, y1: f64, xi: f64) -> f64 {
        let y = &self.y1;
        2.0 * linear(y, &self.coef_a, y1) * xi + linear(y, &self.coef_b, y1)
    }

    pub fn d_y1(&self, y1: f64, xi: f64) -> f64 {
        let y = &self.y1;
        Self::quad(
            linear(y, &self.da, y1),
            linear(y, &self.db, y1),
            linear(y, &self.dc, y1),
            xi,
        )
    }

    pub fn d2_y1(&self, y1: f64, xi: f64) -> f64 {
        let y = &self.y1;
        Self::quad(
            linear(y, &self.dda, y1),
            linear(y, &self.ddb, y1),
            linear(y, &self.ddc, y1),
            xi,
        )
    }

    /// Values at node i on a uniform ξ₂-grid over [0, S(y₁ᵢ)].
    pub fn column(&self, i: usize, n_xi: usize) -> Vec<f64> {
        let s = self.s[i];
        (0..n_xi)
            .map(|k| {
                let xi = s * k as f64 / (n_xi - 1) as f64;
                Self::quad(self.coef_a[i], self.coef_b[i], self.coef_c[i], xi)
            })
            .collect()
    }

    /// Node-wise ξ₂-mean (1/S)∫₀^S u₂ dξ₂ = A S²/3 + B S/2 + C.
    pub fn middle_value(&self, i: usize) -> f64 {
        let s = self.s[i];
        self.coef_a[i] * s * s / 3.0 + self.coef_b[i] * s / 2.0 + self.coef_c[i]
    }

    /// Node-wise ∂u₂/∂y₁ and ∂²u₂/∂y₁² at ξ₂ = ξ.
    pub fn node_derivatives(&self, i: usize, xi: f64) -> (f64, f64) {
        (
            Self::quad(self.da[i], self.db[i], self.dc[i], xi),
            Self::quad(self.dda[i], self.ddb[i], self.ddc[i], xi),
        )
    }
}
