//! The Poisson-type kernel K(x, t) = 2C₀t / ((C₀t)² + x²) and quadrature
//! checks of its integral identities and Hölder-type bounds.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::adaptive;

/// Inner integrals are carried out to |y| = TRUNCATION · C₀τ, beyond which
/// the closed-form tail is added.
const TRUNCATION: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    pub c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    pub alpha: f64,
    /// max over t of ∫₀ᵗ∫₀^∞ |y|^α |K_y| / t^α.
    pub time_constant: f64,
    /// max over (t, d) of ∫₀ᵗ∫_{|y|≤2d} |y|^α |K_y| / d^α.
    pub near_constant: f64,
    /// max over (t, d) of ∫₀ᵗ∫_{|y|≥2d} |y|^α |K_yy| / d^{α−1}.
    pub far_constant: f64,
}

impl SmoothingKernel {
    pub fn new(c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter(format!("C0 must be positive, got {c0}")));
        }
        Ok(Self { c0 })
    }

    fn check_t(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "t",
                value: t,
                lo: 0.0,
                hi: f64::INFINITY,
            })
        }
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        Ok(self.k(x, t))
    }

    #[inline]
    fn k(&self, y: f64, t: f64) -> f64 {
        let a = self.c0 * t;
        2.0 * a / (a * a + y * y)
    }

    #[inline]
    fn k_y(&self, y: f64, t: f64) -> f64 {
        let a = self.c0 * t;
        let r = a * a + y * y;
        -4.0 * a * y / (r * r)
    }

    #[inline]
    fn k_yy(&self, y: f64, t: f64) -> f64 {
        let a = self.c0 * t;
        let r = a * a + y * y;
        4.0 * a * (3.0 * y * y - a * a) / (r * r * r)
    }

    /// ∫_{−∞}^{∞} ∂ᵏK/∂yᵏ(y, τ) dy: adaptive quadrature on the truncated range plus the closed-form tail.
    fn inner_identity(&self, tau: f64, k: u32) -> f64 {
        let a = self.c0 * tau;
        let y_max = TRUNCATION * a;
        let (core, _) = match k {
            0 => adaptive(|y| self.k(y, tau), -y_max, y_max, 1e-14, 1e-13, 4000),
            _ => adaptive(|y| self.k_y(y, tau), -y_max, y_max, 1e-14, 1e-13, 4000),
        };
        let tail = match k {
            // 2 ∫_Y^∞ 2a/(a² + y²) dy = 4 arctan(a / Y)
            0 => 4.0 * (a / y_max).atan(),
            // ∫_Y^∞ K_y = −K(Y), ∫_{−∞}^{−Y} K_y = K(−Y): they cancel
            _ => -self.k(y_max, tau) + self.k(-y_max, tau),
        };
        core + tail
    }

    /// ∫₀ᵗ dτ ∫_ℝ ∂ᵏK/∂yᵏ dy for k ∈ {0, 1}; 2πt for k = 0 and 0 for k = 1.
    pub fn identity_integral(&self, t: f64, k: u32) -> Result<f64> {
        Self::check_t(t)?;
        if k > 1 {
            return Err(Error::InvalidParameter(format!(
                "identity check supports k = 0 or 1, got {k}"
            )));
        }
        let (v, _) = adaptive(|tau| self.inner_identity(tau, k), 0.0, t, 1e-13, 1e-12, 200);
        Ok(v)
    }

    /// Expected value of [`identity_integral`](Self::identity_integral).
    pub fn identity_expected(t: f64, k: u32) -> f64 {
        if k == 0 {
            2.0 * PI * t
        } else {
            0.0
        }
    }

    /// ∫_{lo}^{hi} |y|^α g(y) dy with hi possibly infinite; the infinite tail
    /// beyond a cut is closed with the decay `tail(cut)`.
    fn weighted(&self, g: impl Fn(f64) -> f64, lo: f64, hi: f64, tau: f64, tail: impl Fn(f64) -> f64) -> f64 {
        let a = self.c0 * tau;
        let cut = hi.min(TRUNCATION * a.max(lo));
        let mut v = 0.0;
        if cut > lo {
            // split at the kernel width so the peak is resolved
            let mid = a.clamp(lo, cut);
            v += adaptive(&g, lo, mid, 1e-15, 1e-10, 2000).0;
            v += adaptive(&g, mid, cut, 1e-15, 1e-10, 2000).0;
        }
        if hi.is_infinite() {
            v += tail(cut.max(lo));
        }
        v
    }

    /// Outer τ-integral of f(τ) with weight removal τ = t v^{1/α}.
    fn outer(&self, t: f64, alpha: f64, f: impl Fn(f64) -> f64) -> f64 {
        // dτ = (t/α) v^{1/α − 1} dv turns τ^{α−1}-type singularities into bounded integrands
        adaptive(
            |v| {
                let tau = t * v.powf(1.0 / alpha);
                if tau <= 0.0 {
                    return 0.0;
                }
                f(tau) * (t / alpha) * v.powf(1.0 / alpha - 1.0)
            },
            0.0,
            1.0,
            1e-14,
            1e-8,
            400,
        )
        .0
    }

    /// Evaluates the three Hölder-type integrals over a (t, separation) grid
    /// and reports the largest normalised ratios; finiteness is the check.
    pub fn holder_bounds(&self, alpha: f64, times: &[f64], separations: &[f64]) -> Result<KernelBounds> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        for &t in times {
            Self::check_t(t)?;
        }
        let mut time_constant = 0.0f64;
        let mut near_constant = 0.0f64;
        let mut far_constant = 0.0f64;
        for &t in times {
            let i1 = self.outer(t, alpha, |tau| {
                self.weighted(
                    |y| y.powf(alpha) * self.k_y(y, tau).abs(),
                    0.0,
                    f64::INFINITY,
                    tau,
                    // |K_y| ≤ 4a/y³
                    |y| 4.0 * self.c0 * tau * y.powf(alpha - 2.0) / (2.0 - alpha),
                )
            });
            time_constant = time_constant.max(i1 / t.powf(alpha));
            for &d in separations {
                let i2 = self.outer(t, alpha, |tau| {
                    2.0 * self.weighted(|y| y.powf(alpha) * self.k_y(y, tau).abs(), 0.0, 2.0 * d, tau, |_| 0.0)
                });
                near_constant = near_constant.max(i2 / d.powf(alpha));
                let i3 = self.outer(t, alpha, |tau| {
                    2.0 * self.weighted(
                        |y| y.powf(alpha) * self.k_yy(y, tau).abs(),
                        2.0 * d,
                        f64::INFINITY,
                        tau,
                        // |K_yy| ≤ 12a/y⁴
                        |y| 12.0 * self.c0 * tau * y.powf(alpha - 3.0) / (3.0 - alpha),
                    )
                });
                far_constant = far_constant.max(i3 / d.powf(alpha - 1.0));
            }
        }
        for v in [time_constant, near_constant, far_constant] {
            if !v.is_finite() {
                return Err(Error::NonFinite("kernel bound".into()));
            }
        }
        Ok(KernelBounds {
            alpha,
            time_constant,
            near_constant,
            far_constant,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn value_at_origin() {
        let k = SmoothingKernel::new(1.5).unwrap();
        assert_relative_eq!(k.value(0.0, 2.0).unwrap(), 2.0 / 3.0);
        assert!(k.value(0.0, 0.0).is_err());
        assert!(SmoothingKernel::new(-1.0).is_err());
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let k = SmoothingKernel::new(0.7).unwrap();
        let h = 1e-5;
        for y in [-0.3, 0.1, 0.9] {
            let d1 = (k.k(y + h, 0.5) - k.k(y - h, 0.5)) / (2.0 * h);
            let d2 = (k.k_y(y + h, 0.5) - k.k_y(y - h, 0.5)) / (2.0 * h);
            assert_relative_eq!(k.k_y(y, 0.5), d1, max_relative = 1e-7);
            assert_relative_eq!(k.k_yy(y, 0.5), d2, max_relative = 1e-6);
        }
    }

    #[test]
    fn identity_k0() {
        let k = SmoothingKernel::new(1.0).unwrap();
        let v = k.identity_integral(1.0, 0).unwrap();
        assert_relative_eq!(v, 2.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn identity_k1() {
        let k = SmoothingKernel::new(1.0).unwrap();
        assert!(k.identity_integral(1.0, 1).unwrap().abs() < 1e-6);
    }

    #[test]
    fn time_bound_matches_closed_form() {
        // ∫₀ᵗ∫₀^∞ y^α|K_y| = C₀^{α−1} t^α / α · ∫₀^∞ 4u^{1+α}/(1+u²)² du,
        // and the u-integral equals 2 Γ(1+α/2) Γ(1−α/2) = α π / sin(α π / 2)
        let alpha = 0.5;
        let c0 = 2.0;
        let k = SmoothingKernel::new(c0).unwrap();
        let b = k.holder_bounds(alpha, &[0.7], &[0.1]).unwrap();
        let j = alpha * PI / (alpha * PI / 2.0).sin();
        let expect = c0.powf(alpha - 1.0) * j / alpha;
        assert_relative_eq!(b.time_constant, expect, max_relative = 1e-5);
        assert!(b.near_constant.is_finite() && b.far_constant.is_finite());
    }
}
