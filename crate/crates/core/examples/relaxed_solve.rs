//! Relaxed reference: the pressure with the oblique Stefan flux and zero
//! boundary mean on the domain of the asymptotic law, against the
//! asymptotic pressure.
//!
//!     cargo run --release --example relaxed_solve [eps]

use heleshaw::analysis::{error_series, poincare_diagnostic};
use heleshaw::asymptotics::AsymptoticApproximation;
use heleshaw::config::{ExperimentConfig, ReferenceMode};
use heleshaw::experiment::reference_run;

fn main() -> heleshaw::error::Result<()> {
    let eps: f64 = std::env::args().nth(1).map(|s| s.parse().expect("eps")).unwrap_or(0.05);
    let mut cfg = ExperimentConfig::preset("default")?;
    cfg.solver.reference = ReferenceMode::Relaxed;
    cfg.grid.t_nodes = 5;
    let flux = cfg.flux_data()?;
    let approx = AsymptoticApproximation::build(
        &flux,
        eps,
        heleshaw::asymptotics::AsymptoticOptions {
            n_t: cfg.grid.t_nodes,
            layer_terms: None,
            ..cfg.asymptotic_options()
        },
    )?;
    let run = reference_run(&cfg, &flux, eps)?;
    for ((t, h1, mid), snap) in error_series(&run.trajectory, &approx)?
        .into_iter()
        .zip(&run.trajectory.snapshots)
    {
        let ratio = poincare_diagnostic(&snap.grid)?.ratio.unwrap_or(f64::NAN);
        println!("t {t:.4}: H1 error {h1:.4e}, mid-value error {mid:.4e}, Poincare ratio of p {ratio:.4}");
    }
    Ok(())
}
