//! Integral identities and Hölder-type bounds of the smoothing kernel.
//!
//!     cargo run --release --example kernel

use heleshaw::spectral::SmoothingKernel;

fn main() -> heleshaw::error::Result<()> {
    for c0 in [0.5, 1.0, 3.0] {
        let k = SmoothingKernel::new(c0)?;
        for t in [0.5, 1.0, 2.0] {
            let zeroth = k.identity_integral(t, 0)?;
            let first = k.identity_integral(t, 1)?;
            println!(
                "c0 {c0} t {t}: k=0 integral {zeroth:.10} (expected {:.10}), k=1 integral {first:.2e}",
                SmoothingKernel::identity_expected(t, 0)
            );
        }
        let b = k.holder_bounds(0.5, &[0.5, 1.0, 2.0], &[0.01, 0.1, 1.0])?;
        println!(
            "  alpha {}: time {:.4}, near {:.4}, far {:.4}",
            b.alpha, b.time_constant, b.near_constant, b.far_constant
        );
    }
    Ok(())
}
