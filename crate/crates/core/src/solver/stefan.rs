//! Boundary velocity from the Stefan condition
//! S_t = (εS_{y₁}p_{y₁} − p_{y₂})/(εγ) on η = 1.

use crate::model::BoundaryFluxData;
use crate::quadrature::simpson;
use crate::solver::laplace::MappedPressureGrid;

/// S_t at every free-boundary node, with one-sided second-order η-derivatives.
pub fn stefan_velocity(grid: &MappedPressureGrid) -> Vec<f64> {
    let top = grid.n2 - 1;
    let eps = grid.eps;
    (0..grid.n1)
        .map(|i| {
            let (py1, py2) = grid.gradient(i, top);
            (eps * grid.geometry.s_y[i] * py1 - py2) / (eps * grid.gamma)
        })
        .collect()
}

/// Normal speed |∂p/∂n|/γ of the boundary at each node.
pub fn normal_speed(grid: &MappedPressureGrid, velocity: &[f64]) -> Vec<f64> {
    velocity
        .iter()
        .zip(&grid.geometry.s_y)
        .map(|(v, sy)| grid.eps * v.abs() / (1.0 + (grid.eps * sy).powi(2)).sqrt())
        .collect()
}

/// Instantaneous mass balance: (εγ∫S_t dy₁, total influx).
pub fn mass_balance(grid: &MappedPressureGrid, velocity: &[f64], flux: &BoundaryFluxData) -> (f64, f64) {
    let stored = grid.eps * grid.gamma * simpson(velocity, grid.h1());
    (stored, flux.total_influx(grid.eps, grid.t))
}
