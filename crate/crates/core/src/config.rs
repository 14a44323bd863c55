//! Experiment configuration: TOML with strict key checking, named presets
//! and conversion into flux data and solver settings.
//!
//! The schema is documented in `docs/config.md`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticOptions;
use crate::error::{Error, Result};
use crate::model::{BoundaryFluxData, CutoffFunction, Profile, WellPosednessOptions};
use crate::solver::{LinearSolverKind, SolverConfig, TimeIntegrator};

/// One flux density. `x` is ξ₂ ∈ [0, 1] on the walls and y₁ ∈ [0, l] on the
/// bottom; `span` is the length of that interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// mean + amplitude·cos(2π·frequency·t)
    CosineInTime {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Σ c_k (x/span)^k
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// amplitude·(1 − cos(2πx/span))/2
    CosineWindow {
        amplitude: f64,
    },
}

impl ProfileSpec {
    pub fn to_profile(&self, name: &str, span: f64) -> Profile {
        match self.clone() {
            ProfileSpec::Constant { value } => Profile::constant(value),
            ProfileSpec::CosineInTime {
                mean,
                amplitude,
                frequency,
            } => Profile::new(name, move |_, t| mean + amplitude * (2.0 * PI * frequency * t).cos()),
            ProfileSpec::Polynomial { coefficients } => Profile::new(name, move |x, _| {
                let s = x / span;
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }),
            ProfileSpec::CosineWindow { amplitude } => {
                Profile::new(name, move |x, _| amplitude * 0.5 * (1.0 - (2.0 * PI * x / span).cos()))
            }
        }
    }

    fn check(&self) -> Result<()> {
        let finite = match self {
            ProfileSpec::Constant { value } => value.is_finite(),
            ProfileSpec::CosineInTime {
                mean,
                amplitude,
                frequency,
            } => [mean, amplitude, frequency].iter().all(|v| v.is_finite()),
            ProfileSpec::Polynomial { coefficients } => {
                !coefficients.is_empty() && coefficients.iter().all(|v| v.is_finite())
            }
            ProfileSpec::CosineWindow { amplitude } => amplitude.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "profile {self:?} has missing or non-finite parameters"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub gamma: f64,
    pub length: f64,
    pub horizon: f64,
    pub left: ProfileSpec,
    pub bottom: ProfileSpec,
    pub right: ProfileSpec,
    /// χ₁ breakpoints as fractions of l: support_lo, plateau_lo, plateau_hi, support_hi.
    pub chi1: [f64; 4],
    /// χ₂ breakpoints on [0, 1].
    pub chi2: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScaling {
    Fixed,
    /// n1 − 1 and n2 grow like reference_eps/ε.
    InverseEps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
    pub scaling: GridScaling,
    pub reference_eps: f64,
    /// Stored time nodes; the sup over t runs over these.
    pub t_nodes: usize,
    /// Series truncation M.
    pub terms: usize,
    /// y₁ nodes of the asymptotic profile and corrector.
    pub asymptotic_n1: usize,
    pub layer_terms: usize,
    /// (y₁, t) scan of the solvability checks.
    pub check_n1: usize,
    pub check_t_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMode {
    /// p = 0 on the free boundary, boundary moved by the Stefan condition.
    Dirichlet,
    /// Oblique Stefan flux with zero Γ-mean on the boundary of the asymptotic law.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub reference: ReferenceMode,
    pub dt_safety: f64,
    pub linear_tolerance: f64,
    pub time_integrator: TimeIntegrator,
    pub linear_solver: LinearSolverKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub c0: Vec<f64>,
    pub times: Vec<f64>,
    pub alpha: f64,
    pub separations: Vec<f64>,
    /// Relative tolerance on the k = 0 identity, absolute on k = 1.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub eps: Vec<f64>,
    pub output_dir: String,
    pub flux: FluxConfig,
    pub grid: GridConfig,
    pub solver: SolverSettings,
    pub kernel: KernelConfig,
}

pub const PRESETS: [&str; 4] = ["default", "zero", "lateral-only", "bottom-only"];

impl ExperimentConfig {
    /// Bundled presets: `default` (windowed lateral inflow and a constant
    /// bottom source), `zero`, `lateral-only` (φ₁ = φ₃ ≡ 1, φ₂ ≡ 0) and
    /// `bottom-only` (φ₂ ≡ 0.4).
    pub fn preset(name: &str) -> Result<Self> {
        let window = ProfileSpec::CosineWindow { amplitude: 0.3 };
        let (left, bottom, right) = match name {
            "default" => (window.clone(), ProfileSpec::Constant { value: 0.4 }, window),
            "zero" => (zero(), zero(), zero()),
            "lateral-only" => (
                ProfileSpec::Constant { value: 1.0 },
                zero(),
                ProfileSpec::Constant { value: 1.0 },
            ),
            "bottom-only" => (zero(), ProfileSpec::Constant { value: 0.4 }, zero()),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; available: {}",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            name: name.to_string(),
            eps: vec![0.2, 0.1, 0.05, 0.025],
            output_dir: "out".into(),
            flux: FluxConfig {
                gamma: 1.0,
                length: 1.0,
                horizon: 0.25,
                left,
                bottom,
                right,
                chi1: [0.2, 0.4, 0.6, 0.8],
                chi2: [0.2, 0.4, 0.6, 0.8],
            },
            grid: GridConfig {
                n1: 81,
                n2: 16,
                scaling: GridScaling::InverseEps,
                reference_eps: 0.2,
                t_nodes: 64,
                terms: 64,
                asymptotic_n1: 513,
                layer_terms: 32,
                check_n1: 256,
                check_t_nodes: 64,
            },
            solver: SolverSettings {
                reference: ReferenceMode::Dirichlet,
                dt_safety: 0.5,
                linear_tolerance: 1e-10,
                time_integrator: TimeIntegrator::Euler,
                linear_solver: LinearSolverKind::Auto,
            },
            kernel: KernelConfig {
                c0: vec![0.5, 1.0, 3.0],
                times: vec![0.5, 1.0, 2.0],
                alpha: 0.5,
                separations: vec![0.01, 0.1, 1.0],
                tolerance: 1e-6,
            },
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Positivity and range checks shared with the numerical modules.
    pub fn check(&self) -> Result<()> {
        let f = &self.flux;
        if self.eps.is_empty() {
            return Err(Error::Config("eps list is empty".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(Error::Config(format!("eps = {e} outside (0, 1]")));
        }
        for (name, v) in [("gamma", f.gamma), ("length", f.length), ("horizon", f.horizon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("flux.{name} must be positive, got {v}")));
            }
        }
        for p in [&f.left, &f.bottom, &f.right] {
            p.check()?;
        }
        self.flux_data()?;
        let g = &self.grid;
        if g.t_nodes < 2 || g.terms < 1 || g.asymptotic_n1 < 5 || g.check_n1 < 2 || g.check_t_nodes < 2 {
            return Err(Error::Config("grid sizes too small".into()));
        }
        if !(g.reference_eps > 0.0) {
            return Err(Error::Config("grid.reference_eps must be positive".into()));
        }
        for &e in &self.eps {
            self.solver_config(e)
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let k = &self.kernel;
        if k.c0.iter().any(|c| !(*c > 0.0)) || k.times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("kernel c0 and times must be positive".into()));
        }
        if !(k.alpha > 0.0 && k.alpha < 1.0) || k.separations.iter().any(|d| !(*d > 0.0)) || !(k.tolerance > 0.0) {
            return Err(Error::Config(
                "kernel alpha must lie in (0, 1), separations and tolerance positive".into(),
            ));
        }
        Ok(())
    }

    pub fn flux_data(&self) -> Result<BoundaryFluxData> {
        let f = &self.flux;
        let chi1 = CutoffFunction::scaled(f.chi1, f.length).map_err(|e| Error::Config(format!("chi1: {e}")))?;
        let chi2 = CutoffFunction::scaled(f.chi2, 1.0).map_err(|e| Error::Config(format!("chi2: {e}")))?;
        BoundaryFluxData::new(
            f.left.to_profile("left", 1.0),
            f.bottom.to_profile("bottom", f.length),
            f.right.to_profile("right", 1.0),
            f.gamma,
            f.length,
            f.horizon,
        )?
        .with_cutoffs(chi1, chi2)
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// (n1, n2) at this ε.
    pub fn grid_size(&self, eps: f64) -> (usize, usize) {
        let g = &self.grid;
        match g.scaling {
            GridScaling::Fixed => (g.n1, g.n2),
            GridScaling::InverseEps => {
                let r = g.reference_eps / eps;
                (
                    ((g.n1 - 1) as f64 * r).round() as usize + 1,
                    (g.n2 as f64 * r).round() as usize,
                )
            }
        }
    }

    pub fn solver_config(&self, eps: f64) -> SolverConfig {
        let (n1, n2) = self.grid_size(eps);
        SolverConfig {
            n1,
            n2,
            dt_safety: self.solver.dt_safety,
            linear_tolerance: self.solver.linear_tolerance,
            time_integrator: self.solver.time_integrator,
            linear_solver: self.solver.linear_solver,
        }
    }

    pub fn asymptotic_options(&self) -> AsymptoticOptions {
        AsymptoticOptions {
            n_t: self.grid.t_nodes,
            n_y1: self.grid.asymptotic_n1,
            layer_terms: Some(self.grid.layer_terms),
        }
    }

    pub fn wellposedness_options(&self) -> WellPosednessOptions {
        WellPosednessOptions {
            terms: self.grid.terms,
            n_y1: self.grid.check_n1,
            n_t: self.grid.check_t_nodes,
        }
    }

    /// The stored t-nodes, uniform on [0, T].
    pub fn output_times(&self) -> Vec<f64> {
        crate::model::uniform_grid(0.0, self.flux.horizon, self.grid.t_nodes)
    }
}

fn zero() -> ProfileSpec {
    ProfileSpec::Constant { value: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let cfg = ExperimentConfig::preset(name).unwrap();
            let text = cfg.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_toml(), text);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = ExperimentConfig::preset("default").unwrap().to_toml();
        let typo = text.replacen("dt_safety", "dt_saftey", 1);
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(Error::Config(_))));
        let extra = text.replacen("[flux]", "[flux]\nviscosity = 1.0", 1);
        assert!(matches!(ExperimentConfig::from_toml(&extra), Err(Error::Config(_))));
        let bad_family = text.replacen("cosine-window", "cosine-windw", 1);
        assert!(ExperimentConfig::from_toml(&bad_family).is_err());
    }

    #[test]
    fn positivity_is_enforced_at_load() {
        let mut cfg = ExperimentConfig::preset("default").unwrap();
        cfg.flux.gamma = -1.0;
        assert!(ExperimentConfig::from_toml(&cfg.to_toml()).is_err());
        let mut cfg = ExperimentConfig::preset("default").unwrap();
        cfg.eps = vec![0.1, 0.0];
        assert!(ExperimentConfig::from_toml(&cfg.to_toml()).is_err());
        let mut cfg = ExperimentConfig::preset("default").unwrap();
        cfg.grid.n2 = 4;
        cfg.grid.scaling = GridScaling::Fixed;
        assert!(ExperimentConfig::from_toml(&cfg.to_toml()).is_err());
    }

    #[test]
    fn grids_scale_inversely_with_eps() {
        let cfg = ExperimentConfig::preset("default").unwrap();
        assert_eq!(cfg.grid_size(0.2), (81, 16));
        assert_eq!(cfg.grid_size(0.025), (641, 128));
    }

    #[test]
    fn profile_families() {
        let p = ProfileSpec::Polynomial {
            coefficients: vec![1.0, 2.0, 3.0],
        }
        .to_profile("p", 2.0);
        assert_eq!(p.eval(1.0, 0.0), 1.0 + 1.0 + 0.75);
        let w = ProfileSpec::CosineWindow { amplitude: 0.3 }.to_profile("w", 1.0);
        assert!((w.eval(0.5, 0.0) - 0.3).abs() < 1e-15);
        assert!(w.eval(0.0, 0.0).abs() < 1e-15);
        let c = ProfileSpec::CosineInTime {
            mean: 1.0,
            amplitude: 0.5,
            frequency: 1.0,
        }
        .to_profile("c", 1.0);
        assert!((c.eval(0.3, 0.5) - 0.5).abs() < 1e-15);
    }
}
