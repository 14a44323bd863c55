//! Boundary data model: cutoff functions, the flux data Φ^ε, the sampled
//! free boundary S(y₁, t) and the well-posedness screen.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spectral::pressure::InitialPressureSeries;

/// A smooth bump: 0 outside `(support_lo, support_hi)`, 1 on
/// `[plateau_lo, plateau_hi]`, with exp(−1/x) smoothstep ramps in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFunction {
    pub support_lo: f64,
    pub plateau_lo: f64,
    pub plateau_hi: f64,
    pub support_hi: f64,
}

fn bump_f(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn bump_df(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

/// s(x) = f(x) / (f(x) + f(1 − x)), f(x) = exp(−1/x); s = 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = bump_f(x);
        a / (a + bump_f(1.0 - x))
    }
}

pub fn smoothstep_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let a = bump_f(x);
    let b = bump_f(1.0 - x);
    let da = bump_df(x);
    let db = bump_df(1.0 - x);
    (da * b + a * db) / ((a + b) * (a + b))
}

impl CutoffFunction {
    pub fn new(support_lo: f64, plateau_lo: f64, plateau_hi: f64, support_hi: f64) -> Result<Self> {
        let ordered = support_lo < plateau_lo && plateau_lo < plateau_hi && plateau_hi < support_hi;
        if !ordered
            || ![support_lo, plateau_lo, plateau_hi, support_hi]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "cutoff needs support_lo < plateau_lo < plateau_hi < support_hi, got \
                 {support_lo}, {plateau_lo}, {plateau_hi}, {support_hi}"
            )));
        }
        Ok(Self {
            support_lo,
            plateau_lo,
            plateau_hi,
            support_hi,
        })
    }

    /// χ₁ on [0, l]: support (l/5, 4l/5), plateau [2l/5, 3l/5].
    pub fn chi1(l: f64) -> Self {
        Self::new(0.2 * l, 0.4 * l, 0.6 * l, 0.8 * l).expect("l > 0")
    }

    /// χ₂ on [0, 1]: support (1/5, 4/5), plateau [2/5, 3/5].
    pub fn chi2() -> Self {
        Self::chi1(1.0)
    }

    /// Cutoff with breakpoints given as fractions of `length`.
    pub fn scaled(fractions: [f64; 4], length: f64) -> Result<Self> {
        Self::new(
            fractions[0] * length,
            fractions[1] * length,
            fractions[2] * length,
            fractions[3] * length,
        )
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.support_lo || x >= self.support_hi {
            0.0
        } else if x < self.plateau_lo {
            smoothstep((x - self.support_lo) / (self.plateau_lo - self.support_lo))
        } else if x <= self.plateau_hi {
            1.0
        } else {
            smoothstep((self.support_hi - x) / (self.support_hi - self.plateau_hi))
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.support_lo || x >= self.support_hi || (x >= self.plateau_lo && x <= self.plateau_hi) {
            0.0
        } else if x < self.plateau_lo {
            let w = self.plateau_lo - self.support_lo;
            smoothstep_derivative((x - self.support_lo) / w) / w
        } else {
            let w = self.support_hi - self.plateau_hi;
            -smoothstep_derivative((self.support_hi - x) / w) / w
        }
    }

    /// ∫ χ over its support, Gauss–Legendre on each ramp.
    pub fn integral(&self) -> f64 {
        let ramp_lo = gauss_legendre(|x| self.value(x), self.support_lo, self.plateau_lo, 16);
        let ramp_hi = gauss_legendre(|x| self.value(x), self.plateau_hi, self.support_hi, 16);
        ramp_lo + (self.plateau_hi - self.plateau_lo) + ramp_hi
    }
}

/// A scalar profile (x, t) ↦ φ(x, t).
#[derive(Clone)]
pub struct Profile {
    name: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl Profile {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant({c})"), move |_, _| c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.f)(x, t)
    }

    /// ∂φ/∂x by a fourth-order central difference.
    pub fn dx(&self, x: f64, t: f64, h: f64) -> f64 {
        let f = |s: f64| self.eval(x + s * h, t);
        (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let f = self.f.clone();
        Self::new(format!("{factor}*{}", self.name), move |x, t| factor * f(x, t))
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.name)
    }
}

/// Boundary sides of the rectangle Q = (0, l) × (0, ·).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Bottom,
    Right,
}

/// Flux data: φ₁ (left wall, in ξ₂ = y₂/ε), φ₂ (bottom, in y₁), φ₃ (right
/// wall), the cutoffs, the Stefan constant γ, strip length l and horizon T.
#[derive(Debug, Clone)]
pub struct BoundaryFluxData {
    pub phi1: Profile,
    pub phi2: Profile,
    pub phi3: Profile,
    pub chi1: CutoffFunction,
    pub chi2: CutoffFunction,
    pub gamma: f64,
    pub length: f64,
    pub horizon: f64,
}

/// Gauss–Legendre panels used for ξ₂-integrals of χ₂φ over [0, 1].
const XI_PANELS: usize = 24;

impl BoundaryFluxData {
    pub fn new(phi1: Profile, phi2: Profile, phi3: Profile, gamma: f64, length: f64, horizon: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("length", length), ("horizon", horizon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            phi1,
            phi2,
            phi3,
            chi1: CutoffFunction::chi1(length),
            chi2: CutoffFunction::chi2(),
            gamma,
            length,
            horizon,
        })
    }

    pub fn with_cutoffs(mut self, chi1: CutoffFunction, chi2: CutoffFunction) -> Result<Self> {
        if chi1.support_lo < 0.0 || chi1.support_hi > self.length {
            return Err(Error::InvalidParameter("chi1 support must lie inside [0, l]".into()));
        }
        if chi2.support_lo < 0.0 || chi2.support_hi > 1.0 {
            return Err(Error::InvalidParameter("chi2 support must lie inside [0, 1]".into()));
        }
        self.chi1 = chi1;
        self.chi2 = chi2;
        Ok(self)
    }

    pub fn zero(length: f64, horizon: f64) -> Self {
        Self::new(Profile::zero(), Profile::zero(), Profile::zero(), 1.0, length, horizon).expect("positive")
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon * (1.0 + 1e-12)).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "t",
                value: t,
                lo: 0.0,
                hi: self.horizon,
            })
        }
    }

    /// Φ^ε on one side. `coord` is y₂ ∈ [0, 2ε] on the walls and y₁ ∈ [0, l] on the bottom.
    pub fn eval_phi_eps(&self, eps: f64, side: Side, coord: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let v = match side {
            Side::Bottom => {
                if !(0.0..=self.length).contains(&coord) {
                    return Err(Error::Domain {
                        what: "y1",
                        value: coord,
                        lo: 0.0,
                        hi: self.length,
                    });
                }
                self.bottom_flux(eps, coord, t)
            }
            Side::Left | Side::Right => {
                if !(0.0..=2.0 * eps).contains(&coord) {
                    return Err(Error::Domain {
                        what: "y2",
                        value: coord,
                        lo: 0.0,
                        hi: 2.0 * eps,
                    });
                }
                let xi = coord / eps;
                if side == Side::Left {
                    self.left_density(xi, t)
                } else {
                    self.right_density(xi, t)
                }
            }
        };
        ensure_finite(v, "flux data")
    }

    /// χ₂(ξ)φ₁(ξ, t).
    #[inline]
    pub fn left_density(&self, xi: f64, t: f64) -> f64 {
        let c = self.chi2.value(xi);
        if c == 0.0 {
            0.0
        } else {
            c * self.phi1.eval(xi, t)
        }
    }

    /// χ₂(ξ)φ₃(ξ, t).
    #[inline]
    pub fn right_density(&self, xi: f64, t: f64) -> f64 {
        let c = self.chi2.value(xi);
        if c == 0.0 {
            0.0
        } else {
            c * self.phi3.eval(xi, t)
        }
    }

    /// χ₁(y₁)φ₂(y₁, t), the bottom flux without the factor ε.
    #[inline]
    pub fn bottom_density(&self, y1: f64, t: f64) -> f64 {
        let c = self.chi1.value(y1);
        if c == 0.0 {
            0.0
        } else {
            c * self.phi2.eval(y1, t)
        }
    }

    /// ∂/∂y₁ of χ₁φ₂.
    pub fn bottom_density_dy(&self, y1: f64, t: f64) -> f64 {
        let c = self.chi1.value(y1);
        let dc = self.chi1.derivative(y1);
        if c == 0.0 && dc == 0.0 {
            return 0.0;
        }
        dc * self.phi2.eval(y1, t) + c * self.phi2.dx(y1, t, 1e-3 * self.length)
    }

    #[inline]
    pub fn bottom_flux(&self, eps: f64, y1: f64, t: f64) -> f64 {
        eps * self.bottom_density(y1, t)
    }

    /// ∫₀¹ χ₂φ₁ dξ.
    pub fn left_integral(&self, t: f64) -> f64 {
        let c = self.chi2;
        gauss_legendre(|x| self.left_density(x, t), c.support_lo, c.support_hi, XI_PANELS)
    }

    /// ∫₀¹ χ₂φ₃ dξ.
    pub fn right_integral(&self, t: f64) -> f64 {
        let c = self.chi2;
        gauss_legendre(|x| self.right_density(x, t), c.support_lo, c.support_hi, XI_PANELS)
    }

    /// ∫₀ˡ χ₁φ₂ dy₁.
    pub fn bottom_integral(&self, t: f64) -> f64 {
        let c = self.chi1;
        gauss_legendre(|x| self.bottom_density(x, t), c.support_lo, c.support_hi, 48)
    }

    /// Total boundary influx ∫_{∂Ω∖Γ} Φ^ε dℓ = ε (∫χ₂φ₁ + ∫χ₁φ₂ + ∫χ₂φ₃).
    pub fn total_influx(&self, eps: f64, t: f64) -> f64 {
        eps * (self.left_integral(t) + self.bottom_integral(t) + self.right_integral(t))
    }
}

/// Largest admissible deviation |S − 1|.
pub const HEIGHT_BOUND: f64 = 0.2;

/// Sampled free boundary y₂ = εS(y₁, t) on a uniform y₁-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryState {
    pub y1: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
    pub eps: f64,
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * h }).collect()
}

impl FreeBoundaryState {
    pub fn flat(n: usize, length: f64, eps: f64) -> Result<Self> {
        Self::new(uniform_grid(0.0, length, n.max(2)), vec![1.0; n.max(2)], 0.0, eps)
    }

    pub fn new(y1: Vec<f64>, s: Vec<f64>, t: f64, eps: f64) -> Result<Self> {
        if y1.len() != s.len() || y1.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "state needs matching grids with at least 3 nodes, got {} and {}",
                y1.len(),
                s.len()
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let st = Self { y1, s, t, eps };
        st.check_bounds()?;
        Ok(st)
    }

    /// |S − 1| < 1/5 at every node.
    pub fn check_bounds(&self) -> Result<()> {
        for &v in &self.s {
            if !v.is_finite() {
                return Err(Error::NonFinite("free boundary height".into()));
            }
            if (v - 1.0).abs() >= HEIGHT_BOUND {
                return Err(Error::Domain {
                    what: "S",
                    value: v,
                    lo: 1.0 - HEIGHT_BOUND,
                    hi: 1.0 + HEIGHT_BOUND,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn length(&self) -> f64 {
        self.y1[self.y1.len() - 1]
    }

    pub fn spacing(&self) -> f64 {
        self.length() / (self.n() - 1) as f64
    }

    /// ∂S/∂y₁: central differences inside, second-order one-sided at the ends.
    pub fn slope(&self) -> Vec<f64> {
        first_derivative(&self.s, self.spacing())
    }

    /// ∂²S/∂y₁².
    pub fn curvature(&self) -> Vec<f64> {
        second_derivative(&self.s, self.spacing())
    }
}

pub fn first_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

pub fn second_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    }
    if n >= 4 {
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
        d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
    } else {
        d[0] = d[1];
        d[n - 1] = d[n - 2];
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellPosednessOptions {
    /// Series truncation for the initial-pressure slope.
    pub terms: usize,
    pub n_y1: usize,
    pub n_t: usize,
}

impl Default for WellPosednessOptions {
    fn default() -> Self {
        Self {
            terms: 64,
            n_y1: 256,
            n_t: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellPosednessReport {
    pub eps: f64,
    /// min over t of ∫χ₂φ₁ + ∫χ₁φ₂ + ∫χ₂φ₃.
    pub necessary_integral_min: f64,
    /// max over y₁ of the truncated ∂p₀/∂y₂ at y₂ = ε.
    pub initial_slope_max: f64,
    /// Tail bound attached to `initial_slope_max`.
    pub initial_slope_tail: f64,
    /// min over (y₁, t) of χ₁φ₂ + h₀.
    pub monotone_growth_min: f64,
    pub verdict: bool,
    /// The slope sign could not be decided because |max| is below the tail bound.
    pub indeterminate: bool,
}

/// Screens flux data for the three solvability conditions.
pub fn validate_wellposedness(
    flux: &BoundaryFluxData,
    eps: f64,
    opts: &WellPosednessOptions,
) -> Result<WellPosednessReport> {
    if opts.n_y1 < 2 || opts.n_t < 2 {
        return Err(Error::InvalidParameter(
            "well-posedness grids need at least 2 nodes".into(),
        ));
    }
    let times = uniform_grid(0.0, flux.horizon, opts.n_t);
    let ys = uniform_grid(0.0, flux.length, opts.n_y1);

    let mut necessary = f64::INFINITY;
    let mut growth = f64::INFINITY;
    for &t in &times {
        let left = flux.left_integral(t);
        let right = flux.right_integral(t);
        let total = ensure_finite(left + flux.bottom_integral(t) + right, "necessary integral")?;
        necessary = necessary.min(total);
        let h0 = (left + right) / flux.length;
        for &y in &ys {
            let g = ensure_finite(flux.bottom_density(y, t) + h0, "growth expression")?;
            growth = growth.min(g);
        }
    }

    let series = InitialPressureSeries::build(flux, eps, opts.terms)?;
    let mut slope_max = f64::NEG_INFINITY;
    for &y in &ys {
        slope_max = slope_max.max(ensure_finite(series.top_slope(y), "initial slope")?);
    }
    let tail = series.top_slope_tail_bound();
    let indeterminate = slope_max.abs() <= tail;
    let verdict = necessary > 0.0 && slope_max < 0.0 && growth > 0.0;
    Ok(WellPosednessReport {
        eps,
        necessary_integral_min: necessary,
        initial_slope_max: slope_max,
        initial_slope_tail: tail,
        monotone_growth_min: growth,
        verdict,
        indeterminate,
    })
}
