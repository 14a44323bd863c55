//! Explicit time stepping of the free boundary.
//!
//! Each step solves the Dirichlet pressure problem on the current
//! boundary, reads S_t from the Stefan condition and moves S by Euler or
//! Heun. The step is dt = dt_safety·min(Δt_out, Δy₁/max V_n) with V_n the
//! normal speed of the boundary.

use serde::{Deserialize, Serialize};

use crate::asymptotics::FreeBoundaryEvolution;
use crate::error::{Error, Result};
use crate::model::{first_derivative, BoundaryFluxData, FreeBoundaryState, HEIGHT_BOUND};
use crate::solver::laplace::{solve_flux_step, solve_laplace_step, LinearSolverKind, MappedPressureGrid};
use crate::solver::mapping::ColumnGeometry;
use crate::solver::stefan::{normal_speed, stefan_velocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeIntegrator {
    Euler,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n1: usize,
    pub n2: usize,
    pub dt_safety: f64,
    pub linear_tolerance: f64,
    pub time_integrator: TimeIntegrator,
    #[serde(default = "default_linear_solver")]
    pub linear_solver: LinearSolverKind,
}

fn default_linear_solver() -> LinearSolverKind {
    LinearSolverKind::Auto
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n1: 128,
            n2: 32,
            dt_safety: 0.5,
            linear_tolerance: 1e-10,
            time_integrator: TimeIntegrator::Euler,
            linear_solver: LinearSolverKind::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 16 || self.n2 < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid {} x {} below the 16 x 16 minimum",
                self.n1, self.n2
            )));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_safety {} not in (0, 1]",
                self.dt_safety
            )));
        }
        if !(self.linear_tolerance > 0.0) {
            return Err(Error::InvalidParameter("linear tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySnapshot {
    pub t: f64,
    pub state: FreeBoundaryState,
    pub grid: MappedPressureGrid,
    /// S_t at the nodes, from the Stefan condition or prescribed.
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub eps: f64,
    pub snapshots: Vec<TrajectorySnapshot>,
    /// Number of time steps taken.
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &TrajectorySnapshot {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn states(&self) -> impl Iterator<Item = &FreeBoundaryState> {
        self.snapshots.iter().map(|s| &s.state)
    }
}

fn snapshot(state: FreeBoundaryState, flux: &BoundaryFluxData, config: &SolverConfig) -> Result<TrajectorySnapshot> {
    let grid = solve_laplace_step(&state, flux, config.n2, config.linear_tolerance, config.linear_solver)?;
    let velocity = stefan_velocity(&grid);
    Ok(TrajectorySnapshot {
        t: state.t,
        state,
        grid,
        velocity,
    })
}

/// Free-boundary state after a step, or the reason it is inadmissible.
fn moved(base: &FreeBoundaryState, t: f64, s: Vec<f64>) -> std::result::Result<FreeBoundaryState, String> {
    match FreeBoundaryState::new(base.y1.clone(), s, t, base.eps) {
        Ok(st) => Ok(st),
        Err(Error::Domain { value, .. }) => Err(format!(
            "|S - 1| reached {:.4} (bound {HEIGHT_BOUND})",
            (value - 1.0).abs()
        )),
        Err(e) => Err(e.to_string()),
    }
}

/// Steps the last state of `trajectory` to `t_out` and appends the result.
pub fn advance(
    trajectory: &mut Trajectory,
    flux: &BoundaryFluxData,
    config: &SolverConfig,
    t_out: f64,
    dt_output: f64,
) -> Result<()> {
    let mut current = trajectory.last().clone();
    if !(t_out > current.t) {
        return Err(Error::InvalidParameter(format!(
            "output time {t_out} not after {}",
            current.t
        )));
    }
    let h1 = current.state.spacing();
    let abort = |traj: &Trajectory, t: f64, reason: String| Error::RunAborted {
        t,
        reason,
        partial: Box::new(traj.clone()),
    };
    while current.t < t_out {
        let speed = normal_speed(&current.grid, &current.velocity)
            .into_iter()
            .fold(0.0, f64::max);
        let mut dt = dt_output.min(if speed > 0.0 { h1 / speed } else { f64::INFINITY }) * config.dt_safety;
        // land exactly on the output time without a sliver step
        if current.t + 1.5 * dt >= t_out {
            dt = if current.t + dt >= t_out {
                t_out - current.t
            } else {
                0.5 * (t_out - current.t)
            };
        }
        let t_next = if current.t + dt >= t_out { t_out } else { current.t + dt };
        let dt = t_next - current.t;
        let euler: Vec<f64> = current
            .state
            .s
            .iter()
            .zip(&current.velocity)
            .map(|(s, v)| s + dt * v)
            .collect();
        let s_next = match config.time_integrator {
            TimeIntegrator::Euler => euler,
            TimeIntegrator::Heun => {
                let predictor = moved(&current.state, t_next, euler).map_err(|r| abort(trajectory, t_next, r))?;
                let trial = snapshot(predictor, flux, config)?;
                current
                    .state
                    .s
                    .iter()
                    .zip(current.velocity.iter().zip(&trial.velocity))
                    .map(|(s, (v0, v1))| s + 0.5 * dt * (v0 + v1))
                    .collect()
            }
        };
        let state = moved(&current.state, t_next, s_next).map_err(|r| abort(trajectory, t_next, r))?;
        current = snapshot(state, flux, config)?;
        trajectory.steps += 1;
    }
    trajectory.snapshots.push(current);
    Ok(())
}

/// Runs from the flat initial state through the increasing `output_times`
/// (the first must be 0).
pub fn run(flux: &BoundaryFluxData, eps: f64, config: &SolverConfig, output_times: &[f64]) -> Result<Trajectory> {
    config.validate()?;
    check_times(flux, output_times)?;
    let state = FreeBoundaryState::flat(config.n1, flux.length, eps)?;
    let mut traj = Trajectory {
        eps,
        snapshots: vec![snapshot(state, flux, config)?],
        steps: 0,
    };
    for w in output_times.windows(2) {
        advance(&mut traj, flux, config, w[1], w[1] - w[0])?;
    }
    Ok(traj)
}

fn check_times(flux: &BoundaryFluxData, times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("output times must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("output times must increase strictly".into()));
    }
    flux.check_time(*times.last().unwrap())
}

/// Pressure with the oblique Stefan flux on the boundary given by the
/// asymptotic law, at each output time. The boundary is not evolved; S,
/// S_{y₁} and S_t are evaluated from the law directly.
pub fn prescribed_trajectory(
    flux: &BoundaryFluxData,
    eps: f64,
    config: &SolverConfig,
    output_times: &[f64],
) -> Result<Trajectory> {
    config.validate()?;
    check_times(flux, output_times)?;
    let evolution = FreeBoundaryEvolution::new(flux.clone());
    let mut snapshots = Vec::with_capacity(output_times.len());
    for &t in output_times {
        let state = evolution.state(config.n1, t, eps)?;
        let s_y = state
            .y1
            .iter()
            .map(|&y| evolution.s_y(y, t))
            .collect::<Result<Vec<_>>>()?;
        let velocity = state
            .y1
            .iter()
            .map(|&y| evolution.s_t(y, t))
            .collect::<Result<Vec<_>>>()?;
        let geo = ColumnGeometry {
            eps,
            s: state.s.clone(),
            s_yy: first_derivative(&s_y, state.spacing()),
            s_y,
        };
        let grid = solve_flux_step(&state, geo, &velocity, flux, config.n2, config.linear_tolerance)?;
        snapshots.push(TrajectorySnapshot {
            t,
            state,
            grid,
            velocity,
        });
    }
    Ok(Trajectory {
        eps,
        snapshots,
        steps: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleReport {
    pub delta: f64,
    pub max_slope: f64,
    pub t: f64,
    pub y1: f64,
}

/// max over states and over y₁ ∈ [0, δ] ∪ [l − δ, l] of |∂S/∂y₁|.
pub fn wall_slope<'a>(states: impl IntoIterator<Item = &'a FreeBoundaryState>, delta: f64) -> AngleReport {
    let mut rep = AngleReport {
        delta,
        max_slope: 0.0,
        t: 0.0,
        y1: 0.0,
    };
    for st in states {
        let l = st.length();
        for (y, d) in st.y1.iter().zip(st.slope()) {
            let near = *y <= delta + 1e-12 || *y >= l - delta - 1e-12;
            if near && d.abs() > rep.max_slope {
                rep.max_slope = d.abs();
                rep.t = st.t;
                rep.y1 = *y;
            }
        }
    }
    rep
}

pub fn angle_preservation_check(trajectory: &Trajectory, delta: f64) -> AngleReport {
    wall_slope(trajectory.states(), delta)
}
