//! Build a config from TOML text, override a profile and run the validate
//! and kernel-check commands into a scratch directory.
//!
//!     cargo run --release --example custom_config

use heleshaw::config::{ExperimentConfig, ProfileSpec};
use heleshaw::experiment::{cmd_kernel_check, cmd_validate};

fn main() -> heleshaw::error::Result<()> {
    let mut cfg = ExperimentConfig::from_toml(&ExperimentConfig::preset("default")?.to_toml())?;
    cfg.name = "pulsed-bottom".into();
    cfg.flux.bottom = ProfileSpec::CosineInTime {
        mean: 0.4,
        amplitude: 0.1,
        frequency: 8.0,
    };
    cfg.output_dir = std::env::temp_dir()
        .join("heleshaw-custom")
        .to_string_lossy()
        .into_owned();
    cfg.check()?;
    for report in [cmd_validate(&cfg)?, cmd_kernel_check(&cfg)?] {
        println!("status {:?}", report.status);
        for l in &report.lines {
            println!("  {l}");
        }
        for f in &report.files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(())
}
