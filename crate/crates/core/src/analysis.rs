//! Error norms between the reference pressure and the asymptotic
//! approximation, Poincaré ratios, residual sizes and log–log rate fits.
//!
//! All integrals over Ω^ε(t) are taken on the mapped grid with the
//! trapezoid rule and Jacobian εS. Sup over t is the max over stored
//! snapshots.

use crate::asymptotics::{AsymptoticApproximation, AsymptoticSnapshot, LimitProfile};
use crate::error::{Error, Result};
use crate::model::FreeBoundaryState;
use crate::quadrature::simpson;
use crate::solver::{
    solve_mapped, ColumnGeometry, LinearSolverKind, MappedPressureGrid, MixedProblem, TopData, Trajectory,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub eps: f64,
    pub n1: usize,
    pub n2: usize,
    /// Number of snapshots the sup runs over.
    pub t_nodes: usize,
    /// Last time reached; below T when the run aborted.
    pub t_end: f64,
    pub completed: bool,
    pub sup_t_h1: f64,
    pub sup_t_l2_mid: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    H1,
    Mid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub eps_list: Vec<f64>,
    pub error_list: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Node weights of the mapped trapezoid rule including the Jacobian εS.
fn cell_weights(grid: &MappedPressureGrid) -> Vec<f64> {
    let w1 = trapezoid_weights(grid.n1, grid.h1());
    let w2 = trapezoid_weights(grid.n2, grid.h2());
    let mut w = Vec::with_capacity(grid.n1 * grid.n2);
    for i in 0..grid.n1 {
        let jac = grid.geometry.height(i);
        w.extend(w2.iter().map(|b| w1[i] * b * jac));
    }
    w
}

fn check_layout(grid: &MappedPressureGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.n1 * grid.n2 {
        return Err(Error::Pairing(format!(
            "field has {} values for a {} x {} grid",
            values.len(),
            grid.n1,
            grid.n2
        )));
    }
    Ok(())
}

/// ∇_y of a node field by the mapped chain rule.
fn field_gradient(grid: &MappedPressureGrid, values: &[f64], i: usize, j: usize) -> (f64, f64) {
    let (n1, n2) = (grid.n1, grid.n2);
    let v = |a: usize, b: usize| values[a * n2 + b];
    let one_sided = |f: &dyn Fn(usize) -> f64, k: usize, n: usize, h: f64| {
        if k == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
        } else {
            (f(k + 1) - f(k - 1)) / (2.0 * h)
        }
    };
    let q1 = one_sided(&|a| v(a, j), i, n1, grid.h1());
    let q2 = one_sided(&|b| v(i, b), j, n2, grid.h2());
    grid.geometry.physical_gradient(i, grid.eta[j], q1, q2)
}

/// L²(Ω^ε(t)) norm of a node field.
pub fn l2_norm(grid: &MappedPressureGrid, values: &[f64]) -> Result<f64> {
    check_layout(grid, values)?;
    let w = cell_weights(grid);
    Ok(w.iter().zip(values).map(|(w, v)| w * v * v).sum::<f64>().sqrt())
}

/// L² norm of ∇_y of a node field, gradients by finite differences.
pub fn gradient_l2_norm(grid: &MappedPressureGrid, values: &[f64]) -> Result<f64> {
    check_layout(grid, values)?;
    let w = cell_weights(grid);
    let mut s = 0.0;
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let (a, b) = field_gradient(grid, values, i, j);
            s += w[i * grid.n2 + j] * (a * a + b * b);
        }
    }
    Ok(s.sqrt())
}

/// H¹(Ω^ε(t)) norm of a node field.
pub fn h1_norm(grid: &MappedPressureGrid, values: &[f64]) -> Result<f64> {
    Ok(l2_norm(grid, values)?.hypot(gradient_l2_norm(grid, values)?))
}

/// W^ε = p^ε − 𝒫^ε at the grid nodes.
pub fn error_field(grid: &MappedPressureGrid, snapshot: &AsymptoticSnapshot) -> Vec<f64> {
    let mut w = Vec::with_capacity(grid.n1 * grid.n2);
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            w.push(grid.value(i, j) - snapshot.composite(grid.eps, grid.y1[i], grid.y2(i, j)));
        }
    }
    w
}

fn check_pair(grid: &MappedPressureGrid, eps: f64, t: f64) -> Result<()> {
    if (grid.eps - eps).abs() > 1e-14 * eps || (grid.t - t).abs() > 1e-12 {
        return Err(Error::Pairing(format!(
            "grid at (eps {}, t {}) against approximation at (eps {eps}, t {t})",
            grid.eps, grid.t
        )));
    }
    Ok(())
}

/// H¹ norm of p^ε − 𝒫^ε against one asymptotic snapshot; ∇𝒫^ε exact,
/// ∇p^ε by mapped central differences.
pub fn h1_error_snapshot(grid: &MappedPressureGrid, snapshot: &AsymptoticSnapshot) -> Result<f64> {
    check_pair(grid, snapshot.profile.eps, snapshot.profile.t)?;
    let w = cell_weights(grid);
    let eps = grid.eps;
    let mut s = 0.0;
    for i in 0..grid.n1 {
        let y1 = grid.y1[i];
        for j in 0..grid.n2 {
            let y2 = grid.y2(i, j);
            let e = grid.value(i, j) - snapshot.composite(eps, y1, y2);
            let (pa, pb) = grid.gradient(i, j);
            let (aa, ab) = snapshot.composite_grad(eps, y1, y2);
            let (ga, gb) = (pa - aa, pb - ab);
            s += w[i * grid.n2 + j] * (e * e + ga * ga + gb * gb);
        }
    }
    Ok(s.sqrt())
}

/// Snapshot of `approx` at the grid's time: a stored node when the times
/// agree, otherwise built directly.
pub fn snapshot_for(grid: &MappedPressureGrid, approx: &AsymptoticApproximation) -> Result<AsymptoticSnapshot> {
    if (grid.eps - approx.eps).abs() > 1e-14 * approx.eps {
        return Err(Error::Pairing(format!(
            "grid eps {} vs approximation eps {}",
            grid.eps, approx.eps
        )));
    }
    match approx.times.iter().position(|&t| (t - grid.t).abs() <= 1e-12) {
        Some(k) => Ok(approx.snapshots[k].clone()),
        None => approx
            .snapshot_at(grid.t)
            .map_err(|e| Error::Pairing(format!("no snapshot at t = {}: {e}", grid.t))),
    }
}

pub fn h1_error(grid: &MappedPressureGrid, approx: &AsymptoticApproximation) -> Result<f64> {
    h1_error_snapshot(grid, &snapshot_for(grid, approx)?)
}

/// ⟨⟨p^ε⟩⟩_{εS}(y₁) at every column: ∫₀¹ q dη.
pub fn column_means(grid: &MappedPressureGrid) -> Vec<f64> {
    (0..grid.n1).map(|i| simpson(grid.column(i), grid.h2())).collect()
}

/// ‖⟨⟨p^ε⟩⟩_{εS} − 𝔴₀‖_{L²(0,l)}.
pub fn midvalue_error(grid: &MappedPressureGrid, profile: &LimitProfile) -> Result<f64> {
    check_pair(grid, profile.eps, profile.t)?;
    let means = column_means(grid);
    let sq: Vec<f64> = means
        .iter()
        .zip(&grid.y1)
        .map(|(m, &y)| (m - profile.eval(y)).powi(2))
        .collect();
    Ok(simpson(&sq, grid.h1()).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    /// Arc-length mean over Γ removed before the ratio.
    pub gamma_mean: f64,
    /// ‖f‖/‖∇f‖, `None` when the gradient vanishes.
    pub ratio: Option<f64>,
}

/// Arc-length mean over the top row.
pub fn gamma_mean(grid: &MappedPressureGrid, values: &[f64]) -> f64 {
    let top = grid.n2 - 1;
    let (mut num, mut den) = (0.0, 0.0);
    let w = trapezoid_weights(grid.n1, grid.h1());
    for i in 0..grid.n1 {
        let arc = w[i] * (1.0 + (grid.eps * grid.geometry.s_y[i]).powi(2)).sqrt();
        num += arc * values[i * grid.n2 + top];
        den += arc;
    }
    num / den
}

/// ‖f‖_{L²}/‖∇f‖_{L²} for f with its Γ-mean removed.
pub fn poincare_ratio(grid: &MappedPressureGrid, values: &[f64]) -> Result<PoincareReport> {
    check_layout(grid, values)?;
    let mean = gamma_mean(grid, values);
    let shifted: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let num = l2_norm(grid, &shifted)?;
    let den = gradient_l2_norm(grid, &shifted)?;
    let scale = l2_norm(grid, &vec![1.0; values.len()])?;
    let ratio = (den > 1e-13 * (1.0 + num / scale.max(f64::MIN_POSITIVE))).then(|| num / den);
    Ok(PoincareReport {
        gamma_mean: mean,
        ratio,
    })
}

/// Poincaré ratio of the grid pressure itself.
pub fn poincare_diagnostic(grid: &MappedPressureGrid) -> Result<PoincareReport> {
    poincare_ratio(grid, &grid.p_values)
}

/// Estimate of the best constant in ‖f‖ ≤ C‖∇f‖ over Γ-mean-zero f on the
/// given domain, by inverse iteration of the Neumann Laplacian. Returns the
/// ratio of the last iterate and the number of iterations.
pub fn poincare_constant(
    state: &FreeBoundaryState,
    geometry: &ColumnGeometry,
    n2: usize,
    tolerance: f64,
) -> Result<(f64, usize)> {
    let n1 = state.n();
    let h1 = state.spacing();
    let h2 = 1.0 / (n2 - 1) as f64;
    let heights: Vec<f64> = (0..n1).map(|i| geometry.height(i)).collect();
    // asymmetric start so the iteration is not trapped in an even mode
    let mut v: Vec<f64> = (0..n1 * n2)
        .map(|k| state.y1[k / n2] / state.length() + 0.1 * ((k % n2) as f64 * h2).powi(2))
        .collect();
    let zero = |_: f64| 0.0;
    let mut ratio = 0.0;
    for it in 1..=200 {
        let current = v.clone();
        let heights = &heights;
        let source = move |y1: f64, y2: f64| {
            let i = ((y1 / h1).round() as usize).min(n1 - 1);
            let j = ((y2 / heights[i] / h2).round() as usize).min(n2 - 1);
            -current[i * n2 + j]
        };
        let problem = MixedProblem {
            left: &zero,
            right: &zero,
            bottom: &zero,
            source: Some(&source),
            top: TopData::Oblique(&zero),
        };
        let (x, report) = solve_mapped(geometry, &state.y1, n2, &problem, tolerance, LinearSolverKind::BandLu)?;
        let grid = MappedPressureGrid::new(state.clone(), geometry.clone(), 1.0, n2, x, report);
        let PoincareReport { ratio: r, .. } = poincare_ratio(&grid, &grid.p_values)?;
        let r = r.ok_or_else(|| Error::NonFinite("Poincaré iterate with zero gradient".into()))?;
        let scale = l2_norm(&grid, &grid.p_values)?;
        v = grid.p_values.iter().map(|x| x / scale).collect();
        if (r - ratio).abs() <= 1e-8 * r {
            return Ok((r, it));
        }
        ratio = r;
    }
    Ok((ratio, 200))
}

/// (sup |ε²∂²u₂/∂y₁²| over Ω^ε, sup |ε³S_{y₁}∂u₂/∂y₁| over Γ^ε) on the
/// corrector's own nodes, `samples` points per fibre.
pub fn residual_diagnostics(snapshot: &AsymptoticSnapshot, eps: f64, samples: usize) -> (f64, f64) {
    let c = &snapshot.corrector;
    let p = &snapshot.profile;
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for i in 0..c.y1.len() {
        let s = c.s[i];
        for k in 0..samples.max(2) {
            let xi = s * k as f64 / (samples.max(2) - 1) as f64;
            r1 = r1.max(c.node_derivatives(i, xi).1.abs());
        }
        r2 = r2.max((p.s_y[i] * c.node_derivatives(i, s).0).abs());
    }
    (eps * eps * r1, eps.powi(3) * r2)
}

/// Least-squares fit of log(error) against log(ε).
pub fn fit_log_log(eps: &[f64], errors: &[f64]) -> Result<RateFit> {
    if eps.len() != errors.len() {
        return Err(Error::Pairing("eps and error lists differ in length".into()));
    }
    if eps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points, at least 3 needed",
            eps.len()
        )));
    }
    let (lo, hi) = eps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    if !(hi >= 4.0 * lo * (1.0 - 1e-12)) {
        return Err(Error::InsufficientData(format!(
            "eps spans {lo}..{hi}, less than a factor 4"
        )));
    }
    if eps.iter().chain(errors).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        eps_list: eps.to_vec(),
        error_list: errors.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_rate(records: &[ErrorRecord], which: ErrorNorm) -> Result<RateFit> {
    let eps: Vec<f64> = records.iter().map(|r| r.eps).collect();
    let errors: Vec<f64> = records
        .iter()
        .map(|r| match which {
            ErrorNorm::H1 => r.sup_t_h1,
            ErrorNorm::Mid => r.sup_t_l2_mid,
        })
        .collect();
    fit_log_log(&eps, &errors)
}

/// (t, H¹ error, mid-value error) at every snapshot of the trajectory.
pub fn error_series(trajectory: &Trajectory, approx: &AsymptoticApproximation) -> Result<Vec<(f64, f64, f64)>> {
    trajectory
        .snapshots
        .iter()
        .map(|snap| {
            let a = snapshot_for(&snap.grid, approx)?;
            Ok((
                snap.t,
                h1_error_snapshot(&snap.grid, &a)?,
                midvalue_error(&snap.grid, &a.profile)?,
            ))
        })
        .collect()
}

/// Sup over the trajectory's snapshots of both error norms.
pub fn error_record(trajectory: &Trajectory, approx: &AsymptoticApproximation, completed: bool) -> Result<ErrorRecord> {
    let series = error_series(trajectory, approx)?;
    Ok(record_from_series(trajectory, &series, completed))
}

pub fn record_from_series(trajectory: &Trajectory, series: &[(f64, f64, f64)], completed: bool) -> ErrorRecord {
    let first = &trajectory.snapshots[0].grid;
    ErrorRecord {
        eps: trajectory.eps,
        n1: first.n1,
        n2: first.n2,
        t_nodes: series.len(),
        t_end: trajectory.last().t,
        completed,
        sup_t_h1: series.iter().map(|r| r.1).fold(0.0, f64::max),
        sup_t_l2_mid: series.iter().map(|r| r.2).fold(0.0, f64::max),
    }
}
