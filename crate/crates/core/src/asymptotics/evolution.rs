//! The free-boundary law
//!
//! S(y₁, t) = 1 + (1/γ)∫₀ᵗ χ₁φ₂ dτ + (1/(lγ))∫₀ᵗ∫₀¹ χ₂(φ₃ + φ₁) dξ₂ dτ
//!
//! and its derivatives. S_t comes from the right side (χ₁φ₂ + h₀)/γ.

use crate::error::{Error, Result};
use crate::model::{uniform_grid, BoundaryFluxData, FreeBoundaryState};
use crate::quadrature::gauss_legendre;

/// Nodes of the cached cumulative lateral integral on [0, T].
const CACHE_NODES: usize = 257;

#[derive(Debug, Clone)]
pub struct FreeBoundaryEvolution {
    pub flux: BoundaryFluxData,
    cache_t: Vec<f64>,
    /// ∫₀^{t_k} (∫χ₂φ₁ + ∫χ₂φ₃) dτ at the cache nodes.
    lateral_cumulative: Vec<f64>,
}

/// h₀(t) = (1/l)(∫₀¹χ₂φ₃ + ∫₀¹χ₂φ₁).
pub fn compute_h0(flux: &BoundaryFluxData, t: f64) -> Result<f64> {
    flux.check_time(t)?;
    Ok((flux.right_integral(t) + flux.left_integral(t)) / flux.length)
}

impl FreeBoundaryEvolution {
    pub fn new(flux: BoundaryFluxData) -> Self {
        let cache_t = uniform_grid(0.0, flux.horizon, CACHE_NODES);
        let mut lateral_cumulative = vec![0.0; CACHE_NODES];
        for k in 1..CACHE_NODES {
            let inc = gauss_legendre(
                |tau| flux.left_integral(tau) + flux.right_integral(tau),
                cache_t[k - 1],
                cache_t[k],
                1,
            );
            lateral_cumulative[k] = lateral_cumulative[k - 1] + inc;
        }
        Self {
            flux,
            cache_t,
            lateral_cumulative,
        }
    }

    fn check(&self, y1: f64, t: f64) -> Result<()> {
        self.flux.check_time(t)?;
        let l = self.flux.length;
        if !(-1e-12 * l..=l * (1.0 + 1e-12)).contains(&y1) {
            return Err(Error::Domain {
                what: "y1",
                value: y1,
                lo: 0.0,
                hi: l,
            });
        }
        Ok(())
    }

    pub fn h0(&self, t: f64) -> Result<f64> {
        compute_h0(&self.flux, t)
    }

    /// ∫₀ᵗ (∫χ₂φ₁ + ∫χ₂φ₃) dτ from the cache plus a partial panel.
    fn lateral_cumulative(&self, t: f64) -> f64 {
        let dt = self.cache_t[1];
        let k = ((t / dt).floor() as usize).min(CACHE_NODES - 1);
        let base = self.lateral_cumulative[k];
        let t0 = self.cache_t[k];
        if t <= t0 {
            return base;
        }
        base + gauss_legendre(
            |tau| self.flux.left_integral(tau) + self.flux.right_integral(tau),
            t0,
            t,
            1,
        )
    }

    fn time_panels(&self, t: f64) -> usize {
        ((16.0 * t / self.flux.horizon).ceil() as usize).max(1)
    }

    /// ∫₀ᵗ φ₂(y₁, τ) dτ.
    fn bottom_cumulative(&self, y1: f64, t: f64) -> f64 {
        gauss_legendre(|tau| self.flux.phi2.eval(y1, tau), 0.0, t, self.time_panels(t))
    }

    pub fn s(&self, y1: f64, t: f64) -> Result<f64> {
        self.check(y1, t)?;
        Ok(self.s_unchecked(y1, t))
    }

    pub(crate) fn s_unchecked(&self, y1: f64, t: f64) -> f64 {
        let f = &self.flux;
        let chi = f.chi1.value(y1);
        let bottom = if chi == 0.0 || t == 0.0 {
            0.0
        } else {
            chi * self.bottom_cumulative(y1, t)
        };
        1.0 + bottom / f.gamma + self.lateral_cumulative(t) / (f.length * f.gamma)
    }

    /// ∂S/∂t = (χ₁φ₂ + h₀)/γ.
    pub fn s_t(&self, y1: f64, t: f64) -> Result<f64> {
        self.check(y1, t)?;
        Ok((self.flux.bottom_density(y1, t) + self.h0(t)?) / self.flux.gamma)
    }

    /// ∂S/∂y₁ = (1/γ)∂/∂y₁[χ₁ ∫₀ᵗφ₂ dτ].
    pub fn s_y(&self, y1: f64, t: f64) -> Result<f64> {
        self.check(y1, t)?;
        Ok(self.s_y_unchecked(y1, t))
    }

    pub(crate) fn s_y_unchecked(&self, y1: f64, t: f64) -> f64 {
        let f = &self.flux;
        let chi = f.chi1.value(y1);
        let dchi = f.chi1.derivative(y1);
        if (chi == 0.0 && dchi == 0.0) || t == 0.0 {
            return 0.0;
        }
        let h = 1e-3 * f.length;
        let cum = self.bottom_cumulative(y1, t);
        let dcum = gauss_legendre(|tau| f.phi2.dx(y1, tau, h), 0.0, t, self.time_panels(t));
        (dchi * cum + chi * dcum) / f.gamma
    }

    /// (𝒮₀(t), 𝒮_l(t)), the heights at the two contact points.
    pub fn corner_heights(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.s(0.0, t)?, self.s(self.flux.length, t)?))
    }

    /// S(·, t) sampled on `n` uniform nodes.
    pub fn state(&self, n: usize, t: f64, eps: f64) -> Result<FreeBoundaryState> {
        self.flux.check_time(t)?;
        let y1 = uniform_grid(0.0, self.flux.length, n);
        let s = y1.iter().map(|&y| self.s_unchecked(y, t)).collect();
        FreeBoundaryState::new(y1, s, t, eps)
    }

    /// γ∫₀ˡ S_t dy₁ − (∫₀ˡχ₁φ₂ dy₁ + l h₀); zero up to quadrature error.
    pub fn mass_balance_residual(&self, t: f64) -> Result<f64> {
        self.flux.check_time(t)?;
        let f = &self.flux;
        let h0 = self.h0(t)?;
        let st_integral = gauss_legendre(|y| (f.bottom_density(y, t) + h0) / f.gamma, 0.0, f.length, 64);
        Ok(f.gamma * st_integral - (f.bottom_integral(t) + f.length * h0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CutoffFunction, Profile};
    use approx::assert_relative_eq;

    fn lateral_only() -> BoundaryFluxData {
        BoundaryFluxData::new(
            Profile::constant(1.0),
            Profile::zero(),
            Profile::constant(1.0),
            1.0,
            1.0,
            0.25,
        )
        .unwrap()
    }

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
    fn h0_examples() {
        let zero =
            BoundaryFluxData::new(Profile::zero(), Profile::constant(1.0), Profile::zero(), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(compute_h0(&zero, 0.5).unwrap(), 0.0);
        let i2 = CutoffFunction::chi2().integral();
        assert_relative_eq!(compute_h0(&lateral_only(), 0.1).unwrap(), 2.0 * i2, epsilon = 1e-13);
        let f = generic();
        let doubled =
            BoundaryFluxData::new(f.phi1.scaled(2.0), f.phi2.clone(), f.phi3.scaled(2.0), 1.3, 1.0, 0.25).unwrap();
        assert_relative_eq!(
            compute_h0(&doubled, 0.2).unwrap(),
            2.0 * compute_h0(&f, 0.2).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn initial_height_is_one() {
        let e = FreeBoundaryEvolution::new(generic());
        for y in [0.0, 0.3, 0.5, 1.0] {
            assert_eq!(e.s(y, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn plateau_growth_for_constant_bottom_flux() {
        let f =
            BoundaryFluxData::new(Profile::zero(), Profile::constant(0.7), Profile::zero(), 2.0, 1.0, 0.25).unwrap();
        let e = FreeBoundaryEvolution::new(f);
        assert_relative_eq!(e.s(0.5, 0.2).unwrap(), 1.0 + 0.7 * 0.2 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn flat_near_walls_and_equal_corners() {
        let e = FreeBoundaryEvolution::new(generic());
        let t = 0.17;
        let (s0, sl) = e.corner_heights(t).unwrap();
        assert_eq!(s0, sl);
        for k in 0..=20 {
            let y = 0.2 * k as f64 / 20.0;
            assert_eq!(e.s(y, t).unwrap(), s0);
            assert_eq!(e.s(1.0 - y, t).unwrap(), s0);
            assert_eq!(e.s_y(y, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn corner_height_lateral_only() {
        let e = FreeBoundaryEvolution::new(lateral_only());
        let i2 = CutoffFunction::chi2().integral();
        let (s0, _) = e.corner_heights(0.2).unwrap();
        assert_relative_eq!(s0, 1.0 + 2.0 * 0.2 * i2, epsilon = 1e-13);
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        let e = FreeBoundaryEvolution::new(generic());
        let h = 1e-5;
        for y in [0.1, 0.35, 0.5, 0.7] {
            let fd = (e.s(y, 0.1 + h).unwrap() - e.s(y, 0.1 - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(e.s_t(y, 0.1).unwrap(), fd, epsilon = 1e-8);
            let fd = (e.s(y + h, 0.1).unwrap() - e.s(y - h, 0.1).unwrap()) / (2.0 * h);
            assert_relative_eq!(e.s_y(y, 0.1).unwrap(), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn mass_balance_holds() {
        let e = FreeBoundaryEvolution::new(generic());
        for t in [0.0, 0.1, 0.25] {
            assert!(e.mass_balance_residual(t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_time_rejected() {
        let e = FreeBoundaryEvolution::new(generic());
        assert!(e.s(0.5, 0.3).is_err());
        assert!(e.s(1.5, 0.1).is_err());
    }
}
