//! Cutoffs, boundary flux and the solvability screen for the default preset
//! and a lateral-only variant.
//!
//!     cargo run --release --example flux_data

use heleshaw::config::ExperimentConfig;
use heleshaw::model::{validate_wellposedness, Side};

fn main() -> heleshaw::error::Result<()> {
    for name in ["default", "lateral-only"] {
        let cfg = ExperimentConfig::preset(name)?;
        let flux = cfg.flux_data()?;
        println!("preset {name}");
        println!(
            "  chi1 support [{:.2}, {:.2}], plateau [{:.2}, {:.2}]",
            flux.chi1.support_lo, flux.chi1.support_hi, flux.chi1.plateau_lo, flux.chi1.plateau_hi
        );
        for eps in [0.2, 0.05] {
            let bottom = flux.eval_phi_eps(eps, Side::Bottom, 0.5, 0.0)?;
            let left = flux.eval_phi_eps(eps, Side::Left, 0.5 * eps, 0.0)?;
            println!("  eps {eps}: bottom flux at mid-span {bottom:.4e}, left flux at mid-height {left:.4e}");
            let r = validate_wellposedness(&flux, eps, &cfg.wellposedness_options())?;
            println!(
                "    necessary integral min {:.4e}, growth min {:.4e}, initial slope max {:.3e} (tail {:.1e}), ok {}{}",
                r.necessary_integral_min,
                r.monotone_growth_min,
                r.initial_slope_max,
                r.initial_slope_tail,
                r.verdict,
                if r.indeterminate {
                    ", slope sign indeterminate"
                } else {
                    ""
                }
            );
        }
    }
    Ok(())
}
