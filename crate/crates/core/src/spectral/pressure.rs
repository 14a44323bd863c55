//! Series solution of the initial pressure problem on the rectangle
//! (0, l) × (0, ε):
//!
//! Δp₀ = 0, p₀ = 0 on y₂ = ε, ∂p₀/∂y₂ = φ̄₂ on y₂ = 0,
//! ∂p₀/∂y₁ = φ̄₁ on y₁ = 0, ∂p₀/∂y₁ = φ̄₃ on y₁ = l,
//!
//! with φ̄₁ = −χ₂φ₁, φ̄₂ = −εχ₁φ₂, φ̄₃ = χ₂φ₃ at t = 0. The solution is
//! p₀ = 𝒫₀ + 𝒫₁ + 𝒫₂: 𝒫₀ carries the mean of φ̄₂, 𝒫₁ the remaining
//! Neumann modes in y₁, 𝒫₂ the lateral data in the mixed basis over y₂.

use crate::error::{Error, Result};
use crate::model::BoundaryFluxData;
use crate::spectral::basis::{
    coefficient_bound, fourier_coefficients, second_derivative_l1, EigenBasis, SpectralSeries,
};

/// Samples used for the Fourier coefficients of the boundary data.
const DATA_SAMPLES: usize = 8192;

#[derive(Debug, Clone)]
pub struct InitialPressureSeries {
    pub eps: f64,
    pub length: f64,
    pub terms: usize,
    /// ∂𝒫₀/∂y₂ = φ̄₂,₀ / √l.
    pub p0_slope: f64,
    /// φ̄₂,m for m = 0..M (index 0 feeds `p0_slope`).
    pub p1_coeffs: Vec<f64>,
    /// φ̄₁,m in the mixed basis over [0, ε].
    pub p2_coeffs_left: Vec<f64>,
    /// φ̄₃,m in the mixed basis over [0, ε].
    pub p2_coeffs_right: Vec<f64>,
    y1_basis: EigenBasis,
    y2_basis: EigenBasis,
    // ‖φ̄ᵢ''‖_{L¹} for the tail bounds
    bottom_l1: f64,
    left_l1: f64,
    right_l1: f64,
}

/// sinh((y₂ − ε)s) / cosh(εs) with all exponents non-positive.
#[inline]
fn depth_ratio(y2: f64, eps: f64, s: f64) -> f64 {
    let d = 1.0 + (-2.0 * eps * s).exp();
    (((y2 - 2.0 * eps) * s).exp() - (-y2 * s).exp()) / d
}

/// cosh((y₂ − ε)s) / cosh(εs).
#[inline]
fn depth_ratio_dy(y2: f64, eps: f64, s: f64) -> f64 {
    let d = 1.0 + (-2.0 * eps * s).exp();
    (((y2 - 2.0 * eps) * s).exp() + (-y2 * s).exp()) / d
}

/// cosh(x s) / sinh(l s), 0 ≤ x ≤ l.
#[inline]
fn lateral_ratio(x: f64, l: f64, s: f64) -> f64 {
    let d = 1.0 - (-2.0 * l * s).exp();
    (((x - l) * s).exp() + (-(x + l) * s).exp()) / d
}

/// sinh(x s) / sinh(l s).
#[inline]
fn lateral_ratio_dx(x: f64, l: f64, s: f64) -> f64 {
    let d = 1.0 - (-2.0 * l * s).exp();
    (((x - l) * s).exp() - (-(x + l) * s).exp()) / d
}

fn sample(n: usize, a: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..=n).map(|i| f(a * i as f64 / n as f64)).collect()
}

impl InitialPressureSeries {
    pub fn build(flux: &BoundaryFluxData, eps: f64, terms: usize) -> Result<Self> {
        if terms < 8 {
            return Err(Error::InvalidParameter(format!(
                "series truncation must be at least 8, got {terms}"
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let l = flux.length;
        let y1_basis = EigenBasis::neumann(l)?;
        let y2_basis = EigenBasis::mixed(eps)?;
        let n = DATA_SAMPLES.max(8 * terms);

        let bottom = sample(n, l, |y| -eps * flux.bottom_density(y, 0.0));
        let left = sample(n, eps, |y| -flux.left_density(y / eps, 0.0));
        let right = sample(n, eps, |y| flux.right_density(y / eps, 0.0));
        for v in bottom.iter().chain(&left).chain(&right) {
            if !v.is_finite() {
                return Err(Error::NonFinite("initial flux data".into()));
            }
        }

        let SpectralSeries { coefficients: c, .. } = fourier_coefficients(&bottom, y1_basis, terms)?;
        let SpectralSeries { coefficients: a, .. } = fourier_coefficients(&left, y2_basis, terms)?;
        let SpectralSeries { coefficients: b, .. } = fourier_coefficients(&right, y2_basis, terms)?;

        Ok(Self {
            eps,
            length: l,
            terms,
            p0_slope: c[0] / l.sqrt(),
            p1_coeffs: c,
            p2_coeffs_left: a,
            p2_coeffs_right: b,
            y1_basis,
            y2_basis,
            bottom_l1: second_derivative_l1(&bottom, l),
            left_l1: second_derivative_l1(&left, eps),
            right_l1: second_derivative_l1(&right, eps),
        })
    }

    /// As [`build`](Self::build), but fails when the tail bound exceeds `tolerance`.
    pub fn build_with_tolerance(flux: &BoundaryFluxData, eps: f64, terms: usize, tolerance: f64) -> Result<Self> {
        let s = Self::build(flux, eps, terms)?;
        let tail = s.tail_bound();
        if tail > tolerance {
            return Err(Error::Truncation { terms, tail, tolerance });
        }
        Ok(s)
    }

    fn check_point(&self, y1: f64, y2: f64) -> Result<()> {
        let tol = 1e-12 * self.length;
        if !(-tol..=self.length + tol).contains(&y1) {
            return Err(Error::Domain {
                what: "y1",
                value: y1,
                lo: 0.0,
                hi: self.length,
            });
        }
        if !(-tol..=self.eps + tol).contains(&y2) {
            return Err(Error::Domain {
                what: "y2",
                value: y2,
                lo: 0.0,
                hi: self.eps,
            });
        }
        Ok(())
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Result<f64> {
        self.check_point(y1, y2)?;
        Ok(self.value(y1, y2))
    }

    pub fn grad(&self, y1: f64, y2: f64) -> Result<(f64, f64)> {
        self.check_point(y1, y2)?;
        Ok(self.gradient(y1, y2))
    }

    /// Unchecked evaluation of the truncated series.
    pub fn value(&self, y1: f64, y2: f64) -> f64 {
        let (eps, l) = (self.eps, self.length);
        let mut p = self.p0_slope * (y2 - eps);
        for m in 1..=self.terms {
            let s = self.y1_basis.frequency(m);
            p += self.p1_coeffs[m] * self.y1_basis.eigenfunction(m, y1) * depth_ratio(y2, eps, s) / s;
        }
        for m in 0..=self.terms {
            let s = self.y2_basis.frequency(m);
            let lateral = self.p2_coeffs_right[m] * lateral_ratio(y1, l, s)
                - self.p2_coeffs_left[m] * lateral_ratio(l - y1, l, s);
            p += self.y2_basis.eigenfunction(m, y2) * lateral / s;
        }
        p
    }

    pub fn gradient(&self, y1: f64, y2: f64) -> (f64, f64) {
        let (eps, l) = (self.eps, self.length);
        let mut g1 = 0.0;
        let mut g2 = self.p0_slope;
        for m in 1..=self.terms {
            let s = self.y1_basis.frequency(m);
            let c = self.p1_coeffs[m];
            g1 += c * self.y1_basis.eigenfunction_derivative(m, y1) * depth_ratio(y2, eps, s) / s;
            g2 += c * self.y1_basis.eigenfunction(m, y1) * depth_ratio_dy(y2, eps, s);
        }
        for m in 0..=self.terms {
            let s = self.y2_basis.frequency(m);
            let (a, b) = (self.p2_coeffs_left[m], self.p2_coeffs_right[m]);
            let lateral = b * lateral_ratio(y1, l, s) - a * lateral_ratio(l - y1, l, s);
            let lateral_dx = b * lateral_ratio_dx(y1, l, s) + a * lateral_ratio_dx(l - y1, l, s);
            g1 += self.y2_basis.eigenfunction(m, y2) * lateral_dx;
            g2 += self.y2_basis.eigenfunction_derivative(m, y2) * lateral / s;
        }
        (g1, g2)
    }

    /// ∂p₀/∂y₂ on y₂ = ε, the quantity whose negativity makes the initial
    /// boundary speed positive.
    pub fn top_slope(&self, y1: f64) -> f64 {
        let (eps, l) = (self.eps, self.length);
        let mut v = self.p0_slope;
        for m in 1..=self.terms {
            let s = self.y1_basis.frequency(m);
            // 1 / cosh(εs) in rescaled form
            let sech = 2.0 * (-eps * s).exp() / (1.0 + (-2.0 * eps * s).exp());
            v += self.p1_coeffs[m] * self.y1_basis.eigenfunction(m, y1) * sech;
        }
        let amp = (2.0 / eps).sqrt();
        for m in 0..=self.terms {
            let s = self.y2_basis.frequency(m);
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            let lateral = self.p2_coeffs_right[m] * lateral_ratio(y1, l, s)
                - self.p2_coeffs_left[m] * lateral_ratio(l - y1, l, s);
            v += amp * sign * lateral;
        }
        v
    }

    fn lateral_l1(&self) -> f64 {
        self.left_l1 + self.right_l1
    }

    /// Uniform bound on |p₀ − truncated series| over the rectangle.
    pub fn tail_bound(&self) -> f64 {
        let m = self.terms;
        let (b1, b2) = (&self.y1_basis, &self.y2_basis);
        // 𝒫₁: |c_m| |ψ_m| tanh(εs)/s ≤ (2/l)‖φ̄₂''‖ λ^{-3/2}
        let t1 = b1.sup_norm().powi(2) * self.bottom_l1 * b1.eigenvalue_tail_sum(m, 1.5);
        // 𝒫₂: |ψ_μ| (|a|+|b|) coth(ls)/s ≤ (2/ε)(‖φ̄₁''‖+‖φ̄₃''‖) coth(l s_M) μ^{-3/2}
        let s_m = b2.frequency(m + 1);
        let coth = 1.0 / (b1.length * s_m).tanh();
        let t2 = b2.sup_norm().powi(2) * self.lateral_l1() * coth * b2.eigenvalue_tail_sum(m, 1.5);
        t1 + t2
    }

    /// Bound on the truncation error of [`top_slope`](Self::top_slope).
    pub fn top_slope_tail_bound(&self) -> f64 {
        let m = self.terms;
        let (b1, b2) = (&self.y1_basis, &self.y2_basis);
        let mut t1 = 0.0;
        // exponentially damped by sech(εs); sum explicitly until negligible
        for k in m + 1..m + 100_000 {
            let s = b1.frequency(k);
            let term = b1.sup_norm() * coefficient_bound(b1, k, self.bottom_l1) * 2.0 * (-self.eps * s).exp();
            t1 += term;
            if term < 1e-18 * t1.max(1e-300) {
                break;
            }
        }
        let s_m = b2.frequency(m + 1);
        let coth = 1.0 / (b1.length * s_m).tanh();
        let t2 = (2.0 / self.eps).sqrt() * b2.sup_norm() * self.lateral_l1() * coth * b2.eigenvalue_tail_sum(m, 1.0);
        t1 + t2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;
    use approx::assert_relative_eq;

    fn preset() -> BoundaryFluxData {
        let window = |x: f64, _t: f64| 0.3 * (1.0 - (2.0 * std::f64::consts::PI * x).cos()) / 2.0 + 0.1;
        BoundaryFluxData::new(
            Profile::new("left", window),
            Profile::new("bottom", |y: f64, _t: f64| 0.4 + 0.1 * y),
            Profile::new("right", window),
            1.0,
            1.0,
            0.25,
        )
        .unwrap()
    }

    #[test]
    fn hyperbolic_ratios_match_naive_forms_where_safe() {
        let (eps, l): (f64, f64) = (0.1, 1.0);
        for s in [0.5, 3.0, 17.0] {
            for y in [0.0, 0.03, 0.1] {
                let naive = ((y - eps) * s).sinh() / (eps * s).cosh();
                assert_relative_eq!(depth_ratio(y, eps, s), naive, epsilon = 1e-13);
                let naive = ((y - eps) * s).cosh() / (eps * s).cosh();
                assert_relative_eq!(depth_ratio_dy(y, eps, s), naive, epsilon = 1e-13);
            }
            for x in [0.0, 0.4, 1.0] {
                assert_relative_eq!(
                    lateral_ratio(x, l, s),
                    (x * s).cosh() / (l * s).sinh(),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    lateral_ratio_dx(x, l, s),
                    (x * s).sinh() / (l * s).sinh(),
                    epsilon = 1e-13
                );
            }
        }
        // no overflow far beyond exp's range
        assert!(depth_ratio(0.05, 0.1, 1e5).is_finite());
        assert!(lateral_ratio(0.3, 1.0, 1e4).is_finite());
    }

    #[test]
    fn zero_flux_gives_zero_pressure() {
        let s = InitialPressureSeries::build(&BoundaryFluxData::zero(1.0, 1.0), 0.1, 16).unwrap();
        assert_eq!(s.eval(0.3, 0.05).unwrap(), 0.0);
        assert_eq!(s.tail_bound(), 0.0);
    }

    #[test]
    fn truncation_below_eight_rejected() {
        assert!(InitialPressureSeries::build(&preset(), 0.1, 4).is_err());
    }

    #[test]
    fn dirichlet_face_holds() {
        let s = InitialPressureSeries::build(&preset(), 0.1, 64).unwrap();
        for k in 0..=50 {
            let y1 = k as f64 / 50.0;
            assert!(s.eval(y1, 0.1).unwrap().abs() <= s.tail_bound() + 1e-14);
        }
    }

    #[test]
    fn domain_checked() {
        let s = InitialPressureSeries::build(&preset(), 0.1, 16).unwrap();
        assert!(s.eval(0.5, 0.2).is_err());
        assert!(s.grad(-0.5, 0.05).is_err());
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let s = InitialPressureSeries::build(&preset(), 0.1, 64).unwrap();
        let h = 1e-6;
        for (y1, y2) in [(0.3, 0.05), (0.02, 0.03), (0.97, 0.06)] {
            let (g1, g2) = s.gradient(y1, y2);
            let d1 = (s.value(y1 + h, y2) - s.value(y1 - h, y2)) / (2.0 * h);
            let d2 = (s.value(y1, y2 + h) - s.value(y1, y2 - h)) / (2.0 * h);
            assert_relative_eq!(g1, d1, epsilon = 1e-6);
            assert_relative_eq!(g2, d2, epsilon = 1e-6);
        }
        let (_, top) = s.gradient(0.37, 0.1);
        assert_relative_eq!(top, s.top_slope(0.37), epsilon = 1e-12);
    }

    #[test]
    fn interior_laplacian_residual_small() {
        let s = InitialPressureSeries::build(&preset(), 0.2, 64).unwrap();
        let lap = five_point(&s, 0.5, 0.1, 1.0 / 512.0);
        assert!(lap.abs() <= 1e-6, "residual {lap}");
    }

    fn five_point(s: &InitialPressureSeries, y1: f64, y2: f64, h: f64) -> f64 {
        (s.value(y1 + h, y2) + s.value(y1 - h, y2) + s.value(y1, y2 + h) + s.value(y1, y2 - h) - 4.0 * s.value(y1, y2))
            / (h * h)
    }

    #[test]
    fn laplacian_residual_second_order() {
        let s = InitialPressureSeries::build(&preset(), 0.1, 64).unwrap();
        let coarse = five_point(&s, 0.5, 0.05, 1.0 / 256.0);
        let fine = five_point(&s, 0.5, 0.05, 1.0 / 512.0);
        let order = (coarse / fine).abs().log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn neumann_faces_match_data() {
        let flux = preset();
        let eps = 0.1;
        let s = InitialPressureSeries::build(&flux, eps, 64).unwrap();
        let h = 1e-4;
        let tol = 1e-4 * eps;
        // second-order one-sided difference along a ray into the domain
        let d = |f: &dyn Fn(f64) -> f64| (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
        for k in 1..20 {
            let y2 = eps * k as f64 / 20.0;
            let left = d(&|x| s.value(x, y2));
            assert!((left + flux.left_density(y2 / eps, 0.0)).abs() < tol + s.tail_bound());
            let right = -d(&|x| s.value(1.0 - x, y2));
            assert!((right - flux.right_density(y2 / eps, 0.0)).abs() < tol + s.tail_bound());
        }
        for k in 1..40 {
            let y1 = k as f64 / 40.0;
            let bottom = d(&|x| s.value(y1, x));
            assert!((bottom + eps * flux.bottom_density(y1, 0.0)).abs() < tol + s.tail_bound());
        }
    }

    #[test]
    fn lateral_only_preset_has_negative_top_slope() {
        let flux = BoundaryFluxData::new(
            Profile::constant(1.0),
            Profile::zero(),
            Profile::constant(1.0),
            1.0,
            1.0,
            0.25,
        )
        .unwrap();
        let s = InitialPressureSeries::build(&flux, 0.1, 64).unwrap();
        let (_, g2) = s.grad(0.5, 0.1).unwrap();
        assert!(g2 < 0.0);
        assert!(s.top_slope(0.5) < 0.0);
    }
}
