//! The composite approximation 𝒫^ε = 𝔴₀(y₁, t) + ε² u₂(y₁, y₂/ε, t) on a
//! uniform grid of time nodes, linear in t between nodes.

use crate::asymptotics::corrector::{solve_corrector, CorrectorField};
use crate::asymptotics::evolution::FreeBoundaryEvolution;
use crate::asymptotics::layer::{boundary_layer, BoundaryLayerSolution, LayerSide};
use crate::asymptotics::profile::{solve_limit_profile, LimitProfile};
use crate::error::{Error, Result};
use crate::model::{uniform_grid, BoundaryFluxData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    pub n_t: usize,
    pub n_y1: usize,
    /// Number of boundary-layer modes; `None` skips the layers.
    pub layer_terms: Option<usize>,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self {
            n_t: 64,
            n_y1: 513,
            layer_terms: Some(32),
        }
    }
}

/// Profile, corrector and (optionally) both wall layers at one time.
#[derive(Debug, Clone)]
pub struct AsymptoticSnapshot {
    pub profile: LimitProfile,
    pub corrector: CorrectorField,
    pub layers: Option<(BoundaryLayerSolution, BoundaryLayerSolution)>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticApproximation {
    pub eps: f64,
    pub evolution: FreeBoundaryEvolution,
    pub times: Vec<f64>,
    pub snapshots: Vec<AsymptoticSnapshot>,
    pub options: AsymptoticOptions,
}

pub fn build_snapshot(
    evolution: &FreeBoundaryEvolution,
    t: f64,
    eps: f64,
    options: &AsymptoticOptions,
) -> Result<AsymptoticSnapshot> {
    let profile = solve_limit_profile(evolution, t, options.n_y1, eps)?;
    let corrector = solve_corrector(&profile, evolution.flux.gamma)?;
    let layers = match options.layer_terms {
        Some(m) => Some((
            boundary_layer(&evolution.flux, &profile, LayerSide::Left, m)?,
            boundary_layer(&evolution.flux, &profile, LayerSide::Right, m)?,
        )),
        None => None,
    };
    Ok(AsymptoticSnapshot {
        profile,
        corrector,
        layers,
    })
}

impl AsymptoticSnapshot {
    /// 𝒫^ε at this snapshot's time.
    pub fn composite(&self, eps: f64, y1: f64, y2: f64) -> f64 {
        self.profile.eval(y1) + eps * eps * self.corrector.eval(y1, y2 / eps)
    }

    /// ∇_y 𝒫^ε = (𝔴₀' + ε² ∂u₂/∂y₁, ε ∂u₂/∂ξ₂).
    pub fn composite_grad(&self, eps: f64, y1: f64, y2: f64) -> (f64, f64) {
        let xi = y2 / eps;
        (
            self.profile.eval_prime(y1) + eps * eps * self.corrector.d_y1(y1, xi),
            eps * self.corrector.d_xi(y1, xi),
        )
    }
}

impl AsymptoticApproximation {
    pub fn build(flux: &BoundaryFluxData, eps: f64, options: AsymptoticOptions) -> Result<Self> {
        if options.n_t < 2 {
            return Err(Error::InvalidParameter("at least two time nodes are required".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let evolution = FreeBoundaryEvolution::new(flux.clone());
        let times = uniform_grid(0.0, flux.horizon, options.n_t);
        let snapshots = times
            .iter()
            .map(|&t| build_snapshot(&evolution, t, eps, &options))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            eps,
            evolution,
            times,
            snapshots,
            options,
        })
    }

    /// Snapshot at an arbitrary time, computed directly.
    pub fn snapshot_at(&self, t: f64) -> Result<AsymptoticSnapshot> {
        build_snapshot(&self.evolution, t, self.eps, &self.options)
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        let dt = self.times[1] - self.times[0];
        let k = ((t / dt).floor().max(0.0) as usize).min(n - 2);
        (k, ((t - self.times[k]) / dt).clamp(0.0, 1.0))
    }

    /// 𝒫^ε(y₁, y₂, t) with linear interpolation between time nodes.
    pub fn eval_composite(&self, y1: f64, y2: f64, t: f64) -> Result<f64> {
        self.evolution.flux.check_time(t)?;
        let s = self.evolution.s(y1, t)?;
        let top = self.eps * s;
        if !(-1e-12..=top * (1.0 + 1e-12)).contains(&y2) {
            return Err(Error::Domain {
                what: "y2",
                value: y2,
                lo: 0.0,
                hi: top,
            });
        }
        let (k, w) = self.bracket(t);
        let lo = self.snapshots[k].composite(self.eps, y1, y2);
        if w == 0.0 {
            return Ok(lo);
        }
        let hi = self.snapshots[k + 1].composite(self.eps, y1, y2);
        Ok((1.0 - w) * lo + w * hi)
    }

    /// Largest top-slope residual over all time nodes.
    pub fn max_top_slope_residual(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.corrector.top_slope_residual)
            .fold(0.0, f64::max)
    }

    /// Largest |a₀| over both walls and all time nodes.
    pub fn max_layer_a0(&self) -> Option<f64> {
        self.snapshots
            .iter()
            .map(|s| s.layers.as_ref().map(|(l, r)| l.a0().abs().max(r.a0().abs())))
            .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
    }
}
