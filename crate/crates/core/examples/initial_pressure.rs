//! Spectral series for the initial pressure on the flat strip, checked
//! against a finite-difference solve.
//!
//!     cargo run --release --example initial_pressure

use heleshaw::config::ExperimentConfig;
use heleshaw::model::FreeBoundaryState;
use heleshaw::solver::{solve_laplace_step, LinearSolverKind};
use heleshaw::spectral::InitialPressureSeries;

fn main() -> heleshaw::error::Result<()> {
    let flux = ExperimentConfig::preset("default")?.flux_data()?;
    let eps = 0.1;
    let series = InitialPressureSeries::build(&flux, eps, 64)?;
    println!("eps {eps}, 64 terms, truncation bound {:.2e}", series.tail_bound());
    for y1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!(
            "  y1 {y1:.2}: p0 at bottom {:.5e}, at mid-height {:.5e}, top slope {:.5e}",
            series.eval(y1, 0.0)?,
            series.eval(y1, 0.5 * eps)?,
            series.top_slope(y1)
        );
    }
    for n in [65, 129, 257] {
        let state = FreeBoundaryState::flat(n, flux.length, eps)?;
        let grid = solve_laplace_step(&state, &flux, n, 1e-12, LinearSolverKind::Auto)?;
        let mut diff = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                diff = diff.max((grid.value(i, j) - series.value(grid.y1[i], grid.y2(i, j))).abs());
            }
        }
        println!("  {n}x{n} finite differences: max difference {diff:.3e}");
    }
    Ok(())
}
