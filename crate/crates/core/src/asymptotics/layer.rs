//! Boundary layers at the contact walls.
//!
//! Π₁ is harmonic in the half-strip (0, ∞) × (0, 𝒮), has zero normal
//! derivative on ξ₂ ∈ {0, 𝒮}, decays as ξ₁ → ∞ and satisfies
//! ∂Π₁/∂ξ₁(0, ξ₂) = Υ(ξ₂). With a_m the cosine coefficients of Υ,
//!
//! Π₁ = −Σ_{m≥1} a_m (𝒮/(πm)) e^{−πmξ₁/𝒮} cos(πmξ₂/𝒮),
//!
//! and a decaying solution exists only when a₀ = ⟨⟨Υ⟩⟩ vanishes.

use std::f64::consts::PI;

use crate::asymptotics::profile::LimitProfile;
use crate::error::{Error, Result};
use crate::model::BoundaryFluxData;
use crate::quadrature::gauss_legendre;

/// Compatibility tolerance on a₀.
pub const A0_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLayerSolution {
    pub side: LayerSide,
    pub t: f64,
    pub height: f64,
    /// a₀, a₁, …, a_M.
    pub coefficients: Vec<f64>,
}

impl BoundaryLayerSolution {
    /// Cosine coefficients of `upsilon` on (0, height), without the a₀ check.
    pub fn from_data(side: LayerSide, t: f64, height: f64, terms: usize, upsilon: impl Fn(f64) -> f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::GeometryCollapse(height));
        }
        let panels = 64.max(2 * terms);
        let a0 = gauss_legendre(&upsilon, 0.0, height, panels) / height;
        let mut coefficients = vec![a0];
        for m in 1..=terms {
            let k = PI * m as f64 / height;
            let am = 2.0 / height * gauss_legendre(|x| upsilon(x) * (k * x).cos(), 0.0, height, panels);
            coefficients.push(am);
        }
        Ok(Self {
            side,
            t,
            height,
            coefficients,
        })
    }

    pub fn a0(&self) -> f64 {
        self.coefficients[0]
    }

    /// Π₁(ξ₁, ξ₂), ξ₁ measured from the wall into the strip.
    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        let h = self.height;
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, a)| {
                let k = PI * m as f64 / h;
                -a / k * (-k * xi1).exp() * (k * xi2).cos()
            })
            .sum()
    }

    /// (∂Π₁/∂ξ₁, ∂Π₁/∂ξ₂).
    pub fn grad(&self, xi1: f64, xi2: f64) -> (f64, f64) {
        let h = self.height;
        let mut g = (0.0, 0.0);
        for (m, a) in self.coefficients.iter().enumerate().skip(1) {
            let k = PI * m as f64 / h;
            let e = (-k * xi1).exp();
            g.0 += a * e * (k * xi2).cos();
            g.1 += a * e * (k * xi2).sin();
        }
        g
    }

    pub fn coefficient_l1(&self) -> f64 {
        self.coefficients.iter().skip(1).map(|a| a.abs()).sum()
    }

    /// (Σ|a_m|) e^{−πξ₁/𝒮}.
    pub fn decay_bound(&self, xi1: f64) -> f64 {
        self.coefficient_l1() * (-PI * xi1 / self.height).exp()
    }
}

/// Builds Π₁ (left) or Π₁* (right) from the flux data and the profile.
pub fn boundary_layer(
    flux: &BoundaryFluxData,
    profile: &LimitProfile,
    side: LayerSide,
    terms: usize,
) -> Result<BoundaryLayerSolution> {
    let t = profile.t;
    let n = profile.n();
    let layer = match side {
        LayerSide::Left => {
            let slope = profile.w0_prime[0];
            BoundaryLayerSolution::from_data(side, t, profile.s[0], terms, |x| -flux.left_density(x, t) - slope)?
        }
        LayerSide::Right => {
            let slope = profile.w0_prime[n - 1];
            BoundaryLayerSolution::from_data(side, t, profile.s[n - 1], terms, |x| flux.right_density(x, t) - slope)?
        }
    };
    if !(layer.a0().abs() <= A0_TOLERANCE) {
        return Err(Error::Compatibility {
            a0: layer.a0(),
            tolerance: A0_TOLERANCE,
        });
    }
    Ok(layer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::evolution::FreeBoundaryEvolution;
    use crate::asymptotics::profile::solve_limit_profile;
    use crate::model::Profile;
    use approx::assert_relative_eq;

    fn generic() -> BoundaryFluxData {
        BoundaryFluxData::new(
            Profile::new("l", |x: f64, t: f64| 0.3 + 0.1 * x * (1.0 + t)),
            Profile::new("b", |y: f64, t: f64| 0.4 + 0.2 * y * y + 0.3 * t),
            Profile::new("r", |x: f64, t: f64| 0.2 * (1.0 + (3.0 * x).sin() * t)),
            1.3,
            1.0,
            0.25,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_zero_layer() {
        let l = BoundaryLayerSolution::from_data(LayerSide::Left, 0.0, 1.1, 16, |_| 0.0).unwrap();
        assert!(l.coefficients.iter().all(|&a| a == 0.0));
        assert_eq!(l.eval(0.0, 0.5), 0.0);
    }

    #[test]
    fn single_cosine_mode() {
        let h = 1.07;
        let l = BoundaryLayerSolution::from_data(LayerSide::Left, 0.0, h, 16, |x| (PI * x / h).cos()).unwrap();
        for (m, a) in l.coefficients.iter().enumerate() {
            let expect = if m == 1 { 1.0 } else { 0.0 };
            assert!((a - expect).abs() < 1e-10, "a_{m} = {a}");
        }
    }

    #[test]
    fn layer_solves_wall_condition_and_is_harmonic() {
        let h = 1.05;
        let ups = |x: f64| (PI * x / h).cos() - 0.5 * (3.0 * PI * x / h).cos();
        let l = BoundaryLayerSolution::from_data(LayerSide::Left, 0.0, h, 16, ups).unwrap();
        for x in [0.1, 0.4, 0.8] {
            assert_relative_eq!(l.grad(0.0, x).0, ups(x), epsilon = 1e-10);
        }
        let d = 1e-3;
        let (a, b) = (0.3, 0.4);
        let lap =
            (l.eval(a + d, b) + l.eval(a - d, b) + l.eval(a, b + d) + l.eval(a, b - d) - 4.0 * l.eval(a, b)) / (d * d);
        assert!(lap.abs() < 1e-5);
        assert!(l.grad(0.7, 0.0).1.abs() < 1e-14);
    }

    #[test]
    fn compatibility_from_profile_both_sides() {
        let flux = generic();
        let e = FreeBoundaryEvolution::new(flux.clone());
        for t in [0.0, 0.1, 0.25] {
            let p = solve_limit_profile(&e, t, 129, 0.1).unwrap();
            for side in [LayerSide::Left, LayerSide::Right] {
                let l = boundary_layer(&flux, &p, side, 32).unwrap();
                assert!(l.a0().abs() <= A0_TOLERANCE);
            }
        }
    }

    #[test]
    fn decay_bound_holds() {
        let flux = generic();
        let e = FreeBoundaryEvolution::new(flux.clone());
        let p = solve_limit_profile(&e, 0.2, 129, 0.1).unwrap();
        let l = boundary_layer(&flux, &p, LayerSide::Left, 32).unwrap();
        for xi1 in [1.0, 2.0, 4.0] {
            let sup = (0..=50)
                .map(|k| l.eval(xi1, l.height * k as f64 / 50.0).abs())
                .fold(0.0, f64::max);
            assert!(sup <= l.decay_bound(xi1));
        }
    }

    #[test]
    fn incompatible_data_rejected() {
        let flux = generic();
        let e = FreeBoundaryEvolution::new(flux.clone());
        let mut p = solve_limit_profile(&e, 0.2, 65, 0.1).unwrap();
        p.w0_prime[0] += 1e-3;
        assert!(matches!(
            boundary_layer(&flux, &p, LayerSide::Left, 16),
            Err(Error::Compatibility { .. })
        ));
    }
}
