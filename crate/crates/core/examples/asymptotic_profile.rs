//! The asymptotic boundary law S(y1, t), the limit pressure and the
//! second-order corrector, with their closure checks.
//!
//!     cargo run --release --example asymptotic_profile

use heleshaw::asymptotics::AsymptoticApproximation;
use heleshaw::config::ExperimentConfig;
use heleshaw::experiment::asymptotic_summary;

fn main() -> heleshaw::error::Result<()> {
    let cfg = ExperimentConfig::preset("default")?;
    let flux = cfg.flux_data()?;
    let eps = 0.05;
    let approx = AsymptoticApproximation::build(&flux, eps, cfg.asymptotic_options())?;
    let ev = &approx.evolution;
    for t in [0.0, 0.125, 0.25] {
        let (left, right) = ev.corner_heights(t)?;
        println!(
            "t {t}: h0 {:.4}, S at walls {left:.4} / {right:.4}, S mid {:.4}, mass residual {:.1e}",
            ev.h0(t)?,
            ev.s(0.5, t)?,
            ev.mass_balance_residual(t)?
        );
    }
    let last = approx.snapshots.last().expect("at least two nodes");
    println!(
        "limit pressure at T: w0(0) {:.5e}, w0(0.5) {:.5e}, Gamma mean removed {:.5e}",
        last.profile.eval(0.0),
        last.profile.eval(0.5),
        last.profile.gamma_mean
    );
    println!(
        "corrector mid-depth value at y1 = 0.5: {:.5e}",
        last.corrector.eval(0.5, 0.5 * last.profile.s_at(0.5))
    );
    println!(
        "composite pressure at (0.5, eps/2, T): {:.5e}",
        approx.eval_composite(0.5, 0.5 * eps, flux.horizon)?
    );
    let s = asymptotic_summary(&flux, &approx)?;
    println!(
        "checks: mass {:.1e}, top slope {:.1e}, layer a0 {:.1e}, corner slope {:.1e}, R1/eps^2 {:.4}, R2/eps^3 {:.4}",
        s.mass_balance_residual,
        s.top_slope_residual,
        s.layer_a0.unwrap_or(f64::NAN),
        s.corner_slope,
        s.r1_scaled,
        s.r2_scaled
    );
    Ok(())
}
