//! The graph map (y₁, y₂) ↦ (y₁, η), η = y₂/H(y₁), H = εS, taking Ω^ε(t)
//! onto the rectangle (0, l) × (0, 1).
//!
//! With q(y₁, η) = p(y₁, ηH) the Laplacian pushes forward exactly to
//!
//! Δp = q₁₁ + 2g¹² q₁₂ + g²² q_ηη + b q_η,
//! g¹² = −ηH'/H, g²² = (1 + η²H'²)/H², b = η(2H'² − HH'')/H²,
//!
//! which is also (1/J) ∂_a(J gᵃᵇ ∂_b q) with J = H and g¹¹ = 1.
//! Gradients map back as p_{y₁} = q₁ − (ηH'/H) q_η, p_{y₂} = q_η/H.

use crate::error::{Error, Result};
use crate::model::FreeBoundaryState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedCoefficients {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    /// Coefficient of q_η in the non-divergence form.
    pub b: f64,
    /// Jacobian ∂(y₁, y₂)/∂(y₁, η) = H.
    pub jacobian: f64,
}

impl MappedCoefficients {
    /// Coefficients at height η over a column with S, S_{y₁}, S_{y₁y₁}.
    pub fn at(eps: f64, s: f64, s_y: f64, s_yy: f64, eta: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::GeometryCollapse(s));
        }
        let h = eps * s;
        let hp = eps * s_y;
        let hpp = eps * s_yy;
        Ok(Self {
            g11: 1.0,
            g12: -eta * hp / h,
            g22: (1.0 + eta * eta * hp * hp) / (h * h),
            b: eta * (2.0 * hp * hp - h * hpp) / (h * h),
            jacobian: h,
        })
    }

    /// Applies the operator to mapped derivatives (q₁₁, q₁₂, q₂₂, q₂).
    pub fn apply(&self, q11: f64, q12: f64, q22: f64, q2: f64) -> f64 {
        self.g11 * q11 + 2.0 * self.g12 * q12 + self.g22 * q22 + self.b * q2
    }
}

/// Column geometry (S, S_{y₁}, S_{y₁y₁}) of a state, by second-order differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnGeometry {
    pub eps: f64,
    pub s: Vec<f64>,
    pub s_y: Vec<f64>,
    pub s_yy: Vec<f64>,
}

impl ColumnGeometry {
    pub fn from_state(state: &FreeBoundaryState) -> Result<Self> {
        if let Some(&m) = state.s.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::GeometryCollapse(m));
        }
        Ok(Self {
            eps: state.eps,
            s: state.s.clone(),
            s_y: state.slope(),
            s_yy: state.curvature(),
        })
    }

    /// H = εS at column i.
    pub fn height(&self, i: usize) -> f64 {
        self.eps * self.s[i]
    }

    pub fn coefficients(&self, i: usize, eta: f64) -> Result<MappedCoefficients> {
        MappedCoefficients::at(self.eps, self.s[i], self.s_y[i], self.s_yy[i], eta)
    }

    /// (p_{y₁}, p_{y₂}) from mapped derivatives at column i, height η.
    pub fn physical_gradient(&self, i: usize, eta: f64, q1: f64, q2: f64) -> (f64, f64) {
        let h = self.height(i);
        let hp = self.eps * self.s_y[i];
        (q1 - eta * hp / h * q2, q2 / h)
    }
}

/// Local coefficients of the pushed-forward Laplacian at node `i`, height `eta`.
pub fn transform_coefficients(state: &FreeBoundaryState, i: usize, eta: f64) -> Result<MappedCoefficients> {
    if i >= state.n() {
        return Err(Error::InvalidParameter(format!(
            "node {i} outside a grid of {}",
            state.n()
        )));
    }
    let s_y = state.slope();
    let s_yy = state.curvature();
    MappedCoefficients::at(state.eps, state.s[i], s_y[i], s_yy[i], eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_boundary_is_diagonal() {
        let st = FreeBoundaryState::flat(17, 1.0, 0.1).unwrap();
        for eta in [0.0, 0.5, 1.0] {
            let c = transform_coefficients(&st, 8, eta).unwrap();
            assert_eq!(c.g12, 0.0);
            assert_eq!(c.b, 0.0);
            assert_relative_eq!(c.g22, 100.0, epsilon = 1e-12);
            assert_relative_eq!(c.jacobian, 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn unit_strip_is_identity() {
        let st = FreeBoundaryState::flat(17, 1.0, 1.0).unwrap();
        let c = transform_coefficients(&st, 3, 0.7).unwrap();
        assert_eq!((c.g11, c.g12, c.g22, c.b), (1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn collapse_is_rejected() {
        assert!(matches!(
            MappedCoefficients::at(0.1, 0.0, 0.0, 0.0, 0.5),
            Err(Error::GeometryCollapse(_))
        ));
    }

    // S(y) = 1 + 0.1 sin(2y), p = e^{y₁} sin(y₂) harmonic; the pushed-forward
    // operator applied to q with exact derivatives must vanish identically.
    fn s(y: f64) -> (f64, f64, f64) {
        (
            1.0 + 0.1 * (2.0 * y).sin(),
            0.2 * (2.0 * y).cos(),
            -0.4 * (2.0 * y).sin(),
        )
    }

    #[test]
    fn exact_derivatives_give_zero_residual() {
        let eps = 0.3;
        for (y, eta) in [(0.2, 0.3), (0.7, 0.9), (0.5, 0.0)] {
            let (sv, sy, syy) = s(y);
            let (h, hp, hpp) = (eps * sv, eps * sy, eps * syy);
            let y2 = eta * h;
            let (e, sn, cs) = (y.exp(), y2.sin(), y2.cos());
            // chain rule for q(x, η) = p(x, ηH(x))
            let dy2_dx = eta * hp;
            let q11 = e * sn + 2.0 * e * cs * dy2_dx - e * sn * dy2_dx * dy2_dx + e * cs * eta * hpp;
            let q12 = e * cs * h + (-e * sn * h) * dy2_dx + e * cs * hp;
            let q22 = -e * sn * h * h;
            let q2 = e * cs * h;
            let c = MappedCoefficients::at(eps, sv, sy, syy, eta).unwrap();
            assert!(c.apply(q11, q12, q22, q2).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_form_residual_is_second_order() {
        // (1/J)[∂₁(J q₁ + J g¹² q₂) + ∂_η(J g¹² q₁ + J g²² q₂)] by nested central differences
        let eps = 0.3;
        let q = |x: f64, eta: f64| x.exp() * (eta * eps * s(x).0).sin();
        let flux = |x: f64, eta: f64, d: f64| {
            let (sv, sy, syy) = s(x);
            let c = MappedCoefficients::at(eps, sv, sy, syy, eta).unwrap();
            let q1 = (q(x + d, eta) - q(x - d, eta)) / (2.0 * d);
            let q2 = (q(x, eta + d) - q(x, eta - d)) / (2.0 * d);
            (c.jacobian * (q1 + c.g12 * q2), c.jacobian * (c.g12 * q1 + c.g22 * q2))
        };
        let residual = |d: f64| {
            let (x, eta) = (0.4, 0.6);
            let j = eps * s(x).0;
            let div = (flux(x + d, eta, d).0 - flux(x - d, eta, d).0) / (2.0 * d)
                + (flux(x, eta + d, d).1 - flux(x, eta - d, d).1) / (2.0 * d);
            (div / j).abs()
        };
        let (r1, r2) = (residual(0.02), residual(0.01));
        let order = (r1 / r2).log2();
        assert!(order > 1.9, "order {order}, residuals {r1:.3e} {r2:.3e}");
    }

    #[test]
    fn gradient_maps_back() {
        let st = FreeBoundaryState::new(
            crate::model::uniform_grid(0.0, 1.0, 5),
            vec![1.0, 1.05, 1.1, 1.15, 1.2],
            0.0,
            0.2,
        )
        .unwrap();
        let g = ColumnGeometry::from_state(&st).unwrap();
        // p = y₂ gives q = ηH, q₁ = ηH', q_η = H
        let (h, hp) = (g.height(2), 0.2 * g.s_y[2]);
        let (a, b) = g.physical_gradient(2, 0.5, 0.5 * hp, h);
        assert_relative_eq!(a, 0.0, epsilon = 1e-15);
        assert_relative_eq!(b, 1.0, epsilon = 1e-15);
    }
}
