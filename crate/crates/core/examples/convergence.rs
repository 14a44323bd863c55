//! eps sweep against the asymptotics with fitted rates, for either
//! reference. Uses 9 stored times to keep the run short.
//!
//!     cargo run --release --example convergence [dirichlet|relaxed]

use heleshaw::config::{ExperimentConfig, ReferenceMode};
use heleshaw::experiment::sweep;

fn main() -> heleshaw::error::Result<()> {
    let mut cfg = ExperimentConfig::preset("default")?;
    cfg.grid.t_nodes = 9;
    cfg.solver.reference = match std::env::args().nth(1).as_deref() {
        Some("relaxed") => ReferenceMode::Relaxed,
        _ => ReferenceMode::Dirichlet,
    };
    let sw = sweep(&cfg)?;
    println!("reference {:?}", cfg.solver.reference);
    for e in &sw.entries {
        println!(
            "eps {:<6} completed {:<5} t_end {:.4} H1 {:.4e} mid {:.4e} wall |S_y| {:.2e} Poincare constant {:.4}",
            e.eps,
            e.completed,
            e.record.t_end,
            e.record.sup_t_h1,
            e.record.sup_t_l2_mid,
            e.angle.max_slope,
            e.poincare_constant
        );
    }
    for (name, fit) in [("H1", &sw.h1_fit), ("mid", &sw.mid_fit)] {
        match fit {
            Ok(f) => println!("{name} rate {:.3} (r^2 {:.3})", f.slope, f.r_squared),
            Err(e) => println!("{name} rate unavailable: {e}"),
        }
    }
    Ok(())
}
