//! Command-line front end. Exit codes: 0 success, 1 validation or domain
//! failure, 2 usage or config error, 3 numerical abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heleshaw::config::{ExperimentConfig, ReferenceMode};
use heleshaw::error::{Error, Result};
use heleshaw::experiment::{self, Report};

#[derive(Parser)]
#[command(
    name = "heleshaw",
    version,
    about = "Thin-strip Hele-Shaw free boundary: asymptotics and reference solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen the flux data for the solvability conditions at every eps.
    Validate(Common),
    /// Tabulate the asymptotic law, limit profile and corrector.
    Asymptotics(Common),
    /// Run the reference solver and write boundary and pressure tables.
    Solve(Common),
    /// eps sweep: error norms against the asymptotics and fitted rates.
    Converge(Common),
    /// Kernel integral identities and Hölder-type bounds.
    KernelCheck(Common),
    /// Print the resolved config as TOML.
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; the preset is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    preset: String,
    /// Comma-separated eps list.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    t_nodes: Option<usize>,
    #[arg(long, value_enum)]
    reference: Option<Reference>,
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Reference {
    Dirichlet,
    Relaxed,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = experiment::load_config(self.config.as_deref(), &self.preset)?;
        if let Some(e) = &self.eps {
            cfg.eps = e.clone();
        }
        if let Some(n) = self.n1 {
            cfg.grid.n1 = n;
        }
        if let Some(n) = self.n2 {
            cfg.grid.n2 = n;
        }
        if let Some(n) = self.t_nodes {
            cfg.grid.t_nodes = n;
        }
        if let Some(r) = self.reference {
            cfg.solver.reference = match r {
                Reference::Dirichlet => ReferenceMode::Dirichlet,
                Reference::Relaxed => ReferenceMode::Relaxed,
            };
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn execute(command: &Command) -> Result<Option<Report>> {
    let (common, f): (&Common, fn(&ExperimentConfig) -> Result<Report>) = match command {
        Command::Validate(c) => (c, experiment::cmd_validate),
        Command::Asymptotics(c) => (c, experiment::cmd_asymptotics),
        Command::Solve(c) => (c, experiment::cmd_solve),
        Command::Converge(c) => (c, experiment::cmd_converge),
        Command::KernelCheck(c) => (c, experiment::cmd_kernel_check),
        Command::Config(c) => {
            print!("{}", c.resolve()?.to_toml());
            return Ok(None);
        }
    };
    f(&common.resolve()?).map(Some)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::RunAborted { .. } = e {
                eprintln!("the run hit the geometry bound; partial results were not written");
            }
            ExitCode::from(experiment::exit_code_for(&e) as u8)
        }
    }
}
