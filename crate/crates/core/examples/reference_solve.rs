//! Dirichlet reference run: the free boundary moved by the Stefan condition
//! with p = 0 on it. Prints the boundary, mass balance and wall slope.
//!
//!     cargo run --release --example reference_solve [eps]

use heleshaw::config::ExperimentConfig;
use heleshaw::experiment::{reference_mass_balance, reference_run};
use heleshaw::solver::angle_preservation_check;

fn main() -> heleshaw::error::Result<()> {
    let eps: f64 = std::env::args().nth(1).map(|s| s.parse().expect("eps")).unwrap_or(0.05);
    let mut cfg = ExperimentConfig::preset("default")?;
    cfg.grid.t_nodes = 9;
    let flux = cfg.flux_data()?;
    let (n1, n2) = cfg.grid_size(eps);
    let run = reference_run(&cfg, &flux, eps)?;
    let traj = &run.trajectory;
    println!(
        "eps {eps}, grid {n1}x{n2}, {} steps, completed {}",
        traj.steps, run.completed
    );
    if let Some(r) = &run.abort_reason {
        println!("  {r}");
    }
    for (snap, (_, mass)) in traj.snapshots.iter().zip(reference_mass_balance(traj, &flux)) {
        let s = &snap.state.s;
        println!(
            "  t {:.4}: S(0) {:.4}, S(l/2) {:.4}, max p {:.4e}, mass error {:.3}%",
            snap.t,
            s[0],
            s[s.len() / 2],
            snap.grid.max_abs(),
            100.0 * mass
        );
    }
    let a = angle_preservation_check(traj, 0.1 * flux.length);
    println!(
        "largest |S_y| on the outer tenths: {:.3e} at y1 {:.3}, t {:.4}",
        a.max_slope, a.y1, a.t
    );
    Ok(())
}
