//! Cosine eigenbases on an interval and the associated Fourier series.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// −ψ'' = λψ, ψ'(0) = ψ'(a) = 0: λ_m = (πm/a)².
    Neumann,
    /// −ψ'' = μψ, ψ'(0) = 0, ψ(a) = 0: μ_m = (π(m + ½)/a)².
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBasis {
    pub kind: BasisKind,
    pub length: f64,
}

impl EigenBasis {
    pub fn new(kind: BasisKind, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interval length must be positive, got {length}"
            )));
        }
        Ok(Self { kind, length })
    }

    pub fn neumann(length: f64) -> Result<Self> {
        Self::new(BasisKind::Neumann, length)
    }

    pub fn mixed(length: f64) -> Result<Self> {
        Self::new(BasisKind::Mixed, length)
    }

    /// Square root of the eigenvalue (the angular frequency).
    #[inline]
    pub fn frequency(&self, m: usize) -> f64 {
        match self.kind {
            BasisKind::Neumann => PI * m as f64 / self.length,
            BasisKind::Mixed => PI * (m as f64 + 0.5) / self.length,
        }
    }

    #[inline]
    pub fn eigenvalue(&self, m: usize) -> f64 {
        let k = self.frequency(m);
        k * k
    }

    #[inline]
    fn norm(&self, m: usize) -> f64 {
        if self.kind == BasisKind::Neumann && m == 0 {
            (1.0 / self.length).sqrt()
        } else {
            (2.0 / self.length).sqrt()
        }
    }

    #[inline]
    pub fn eigenfunction(&self, m: usize, x: f64) -> f64 {
        self.norm(m) * (self.frequency(m) * x).cos()
    }

    #[inline]
    pub fn eigenfunction_derivative(&self, m: usize, x: f64) -> f64 {
        let k = self.frequency(m);
        -self.norm(m) * k * (k * x).sin()
    }

    /// Sup norm of every eigenfunction with index ≥ 1.
    pub fn sup_norm(&self) -> f64 {
        (2.0 / self.length).sqrt()
    }

    /// Upper bound for Σ_{m > M} λ_m^{−p}, p > ½, by integral comparison.
    pub fn eigenvalue_tail_sum(&self, terms: usize, p: f64) -> f64 {
        // λ_m ≥ (π m / a)² for both kinds
        let m = terms.max(1) as f64;
        (self.length / PI).powf(2.0 * p) * m.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0)
    }
}

/// A truncated expansion g ≈ Σ_{m=0}^{M} g_m ψ_m.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    pub basis: EigenBasis,
    pub coefficients: Vec<f64>,
}

/// Fourier coefficients g_m = ⟨g, ψ_m⟩ of samples on a uniform grid over
/// [0, a] (endpoints included), by composite Simpson.
pub fn fourier_coefficients(samples: &[f64], basis: EigenBasis, terms: usize) -> Result<SpectralSeries> {
    let n = samples.len();
    if n < 4 * terms.max(1) || n < 3 {
        return Err(Error::Resolution(format!(
            "{n} samples cannot resolve {terms} modes (need at least {})",
            4 * terms.max(1)
        )));
    }
    let h = basis.length / (n - 1) as f64;
    let mut work = vec![0.0; n];
    let coefficients = (0..=terms)
        .map(|m| {
            for (i, w) in work.iter_mut().enumerate() {
                *w = samples[i] * basis.eigenfunction(m, i as f64 * h);
            }
            simpson(&work, h)
        })
        .collect();
    Ok(SpectralSeries { basis, coefficients })
}

impl SpectralSeries {
    pub fn terms(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(m, g)| g * self.basis.eigenfunction(m, x))
            .sum()
    }

    /// Σ_m |g_m| λ_m^{(k−1)/2}, skipping a zero eigenvalue.
    pub fn decay_report(&self, k: u32) -> f64 {
        let e = (k as f64 - 1.0) / 2.0;
        self.coefficients
            .iter()
            .enumerate()
            .filter_map(|(m, g)| {
                let lam = self.basis.eigenvalue(m);
                (lam > 0.0).then(|| g.abs() * lam.powf(e))
            })
            .sum()
    }

    pub fn sum_squares(&self) -> f64 {
        self.coefficients.iter().map(|g| g * g).sum()
    }
}

/// ‖g''‖_{L¹(0,a)} from uniform samples (second differences).
pub fn second_derivative_l1(samples: &[f64], length: f64) -> f64 {
    let n = samples.len();
    if n < 3 {
        return 0.0;
    }
    let h = length / (n - 1) as f64;
    samples.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs() / h).sum()
}

/// Bound on a single coefficient from two integrations by parts:
/// |g_m| ≤ √(2/a) ‖g''‖_{L¹} / λ_m, valid for data whose boundary terms vanish.
pub fn coefficient_bound(basis: &EigenBasis, m: usize, g2_l1: f64) -> f64 {
    let lam = basis.eigenvalue(m);
    if lam == 0.0 {
        f64::INFINITY
    } else {
        basis.sup_norm() * g2_l1 / lam
    }
}
