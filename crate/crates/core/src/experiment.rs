//! Command logic behind the `heleshaw` binary: validate, asymptotics, solve,
//! converge and kernel-check. Every command writes CSV tables and a text
//! report into the configured output directory.
//!
//! Output files start with `#` lines carrying the crate version, the command
//! and the SHA-256 of the canonical config. Floats are printed with `{:.12e}`
//! so identical configs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::{
    error_field, error_series, fit_rate, poincare_constant, poincare_diagnostic, poincare_ratio, record_from_series,
    residual_diagnostics, snapshot_for, ErrorNorm, ErrorRecord, RateFit,
};
use crate::asymptotics::{AsymptoticApproximation, AsymptoticOptions, FreeBoundaryEvolution};
use crate::config::{ExperimentConfig, ReferenceMode};
use crate::error::{Error, Result};
use crate::model::{first_derivative, validate_wellposedness, BoundaryFluxData};
use crate::solver::{
    angle_preservation_check, mass_balance, prescribed_trajectory, run, AngleReport, ColumnGeometry, Trajectory,
};
use crate::spectral::SmoothingKernel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ValidationFailed,
    Aborted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::ValidationFailed => 1,
            Status::Aborted => 3,
        }
    }
}

/// Exit code for a command that failed with `err`.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::RunAborted { .. }
        | Error::NonFinite(_)
        | Error::LinearSolver(_)
        | Error::GeometryCollapse(_)
        | Error::Truncation { .. } => 3,
        _ => 1,
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// SHA-256 of the canonical TOML with `output_dir` blanked, so the same run
/// written to two places carries the same hash.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = ExperimentConfig {
        output_dir: String::new(),
        ..cfg.clone()
    };
    Sha256::digest(canonical.to_toml().as_bytes())
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

struct Output<'a> {
    cfg: &'a ExperimentConfig,
    command: &'static str,
    dir: PathBuf,
    files: Vec<PathBuf>,
    lines: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(cfg: &'a ExperimentConfig, command: &'static str) -> Result<Self> {
        let dir = PathBuf::from(&cfg.output_dir);
        fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            cfg,
            command,
            dir,
            files: Vec::new(),
            lines: Vec::new(),
        })
    }

    fn header(&self) -> String {
        format!(
            "# heleshaw {VERSION}\n# command: {}\n# config: {} sha256 {}\n",
            self.command,
            self.cfg.name,
            config_hash(self.cfg)
        )
    }

    fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut text = self.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.lines.push(line);
    }

    fn finish(mut self, status: Status) -> Result<Report> {
        let mut text = self.header();
        for l in &self.lines {
            text.push_str(l);
            text.push('\n');
        }
        self.write(&format!("{}_report.txt", self.command), &text)?;
        Ok(Report {
            status,
            files: self.files,
            lines: self.lines,
        })
    }
}

pub fn cmd_validate(cfg: &ExperimentConfig) -> Result<Report> {
    let flux = cfg.flux_data()?;
    let mut out = Output::new(cfg, "validate")?;
    let mut rows = Vec::new();
    let mut ok = true;
    for &eps in &cfg.eps {
        let r = validate_wellposedness(&flux, eps, &cfg.wellposedness_options())?;
        ok &= r.verdict;
        out.say(format!(
            "eps {eps}: necessary_integral_min {:.6e}, initial_slope_max {:.6e} (tail {:.1e}), \
             monotone_growth_min {:.6e} -> {}{}",
            r.necessary_integral_min,
            r.initial_slope_max,
            r.initial_slope_tail,
            r.monotone_growth_min,
            if r.verdict { "well-posed" } else { "NOT well-posed" },
            if r.indeterminate {
                " (slope sign indeterminate)"
            } else {
                ""
            }
        ));
        rows.push(vec![
            num(eps),
            num(r.necessary_integral_min),
            num(r.initial_slope_max),
            num(r.initial_slope_tail),
            num(r.monotone_growth_min),
            r.verdict.to_string(),
            r.indeterminate.to_string(),
        ]);
    }
    out.table(
        "validate.csv",
        &[
            "eps",
            "necessary_integral_min",
            "initial_slope_max",
            "initial_slope_tail",
            "monotone_growth_min",
            "verdict",
            "indeterminate",
        ],
        &rows,
    )?;
    out.finish(if ok { Status::Success } else { Status::ValidationFailed })
}

/// Checks on the asymptotic law and corrector at one ε.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSummary {
    pub eps: f64,
    /// max over t-nodes of |γ∫S_t − ∫χ₁φ₂ − l·h₀|.
    pub mass_balance_residual: f64,
    pub top_slope_residual: f64,
    pub layer_a0: Option<f64>,
    /// max |S_{y₁}| outside the support of χ₁.
    pub corner_slope: f64,
    pub r1_scaled: f64,
    pub r2_scaled: f64,
}

pub fn asymptotic_summary(flux: &BoundaryFluxData, approx: &AsymptoticApproximation) -> Result<AsymptoticSummary> {
    let ev = &approx.evolution;
    let mut mb = 0.0f64;
    let mut corner = 0.0f64;
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    let (lo, hi) = (flux.chi1.support_lo, flux.chi1.support_hi);
    for (k, &t) in approx.times.iter().enumerate() {
        mb = mb.max(ev.mass_balance_residual(t)?.abs());
        for &y in &approx.snapshots[k].profile.y1 {
            if y <= lo || y >= hi {
                corner = corner.max(ev.s_y(y, t)?.abs());
            }
        }
        let (a, b) = residual_diagnostics(&approx.snapshots[k], approx.eps, 17);
        r1 = r1.max(a);
        r2 = r2.max(b);
    }
    let eps = approx.eps;
    Ok(AsymptoticSummary {
        eps,
        mass_balance_residual: mb,
        top_slope_residual: approx.max_top_slope_residual(),
        layer_a0: approx.max_layer_a0(),
        corner_slope: corner,
        r1_scaled: r1 / (eps * eps),
        r2_scaled: r2 / eps.powi(3),
    })
}

pub fn cmd_asymptotics(cfg: &ExperimentConfig) -> Result<Report> {
    let flux = cfg.flux_data()?;
    let mut out = Output::new(cfg, "asymptotics")?;
    let mut summary = Vec::new();
    for &eps in &cfg.eps {
        let approx = AsymptoticApproximation::build(&flux, eps, cfg.asymptotic_options())?;
        let mut rows = Vec::new();
        for (k, &t) in approx.times.iter().enumerate() {
            let snap = &approx.snapshots[k];
            let p = &snap.profile;
            for i in 0..p.n() {
                rows.push(vec![
                    num(t),
                    num(p.y1[i]),
                    num(p.s[i]),
                    num(p.s_y[i]),
                    num(p.s_t[i]),
                    num(p.w0[i]),
                    num(p.w0_prime[i]),
                    num(snap.corrector.middle_value(i)),
                ]);
            }
        }
        out.table(
            &format!("asymptotics_{}.csv", eps_tag(eps)),
            &["t", "y1", "S", "S_y1", "S_t", "w0", "w0_y1", "u2_mean"],
            &rows,
        )?;
        let s = asymptotic_summary(&flux, &approx)?;
        out.say(format!(
            "eps {eps}: mass balance residual {:.3e}, top-slope residual {:.3e}, a0 {}, corner |S_y1| {:.3e}, \
             R1/eps^2 {:.6e}, R2/eps^3 {:.6e}",
            s.mass_balance_residual,
            s.top_slope_residual,
            s.layer_a0.map_or("-".into(), |a| format!("{a:.3e}")),
            s.corner_slope,
            s.r1_scaled,
            s.r2_scaled
        ));
        summary.push(vec![
            num(eps),
            num(s.mass_balance_residual),
            num(s.top_slope_residual),
            s.layer_a0.map_or("nan".into(), num),
            num(s.corner_slope),
            num(s.r1_scaled),
            num(s.r2_scaled),
        ]);
    }
    out.table(
        "asymptotics_summary.csv",
        &[
            "eps",
            "mass_balance_residual",
            "top_slope_residual",
            "layer_a0",
            "corner_slope",
            "r1_over_eps2",
            "r2_over_eps3",
        ],
        &summary,
    )?;
    out.finish(Status::Success)
}

/// A reference run at one ε, possibly cut short by the geometry bound.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub trajectory: Trajectory,
    pub completed: bool,
    pub abort_reason: Option<String>,
}

pub fn reference_run(cfg: &ExperimentConfig, flux: &BoundaryFluxData, eps: f64) -> Result<ReferenceRun> {
    let sc = cfg.solver_config(eps);
    let times = cfg.output_times();
    let result = match cfg.solver.reference {
        ReferenceMode::Dirichlet => run(flux, eps, &sc, &times),
        ReferenceMode::Relaxed => prescribed_trajectory(flux, eps, &sc, &times),
    };
    match result {
        Ok(trajectory) => Ok(ReferenceRun {
            trajectory,
            completed: true,
            abort_reason: None,
        }),
        Err(Error::RunAborted { t, reason, partial }) => Ok(ReferenceRun {
            trajectory: *partial,
            completed: false,
            abort_reason: Some(format!("aborted at t = {t:.6}: {reason}")),
        }),
        Err(e) => Err(e),
    }
}

/// max over stored times of |εγ∫S_t − influx| / influx.
pub fn reference_mass_balance(run: &Trajectory, flux: &BoundaryFluxData) -> Vec<(f64, f64)> {
    run.snapshots
        .iter()
        .map(|s| {
            let (stored, influx) = mass_balance(&s.grid, &s.velocity, flux);
            (s.t, (stored - influx).abs() / influx.abs().max(f64::MIN_POSITIVE))
        })
        .collect()
}

pub fn cmd_solve(cfg: &ExperimentConfig) -> Result<Report> {
    let flux = cfg.flux_data()?;
    let mut out = Output::new(cfg, "solve")?;
    let mut status = Status::Success;
    let mut summary = Vec::new();
    for &eps in &cfg.eps {
        let r = reference_run(cfg, &flux, eps)?;
        let traj = &r.trajectory;
        let mut boundary = Vec::new();
        let mut pressure = Vec::new();
        for snap in &traj.snapshots {
            let g = &snap.grid;
            for i in 0..g.n1 {
                boundary.push(vec![
                    num(snap.t),
                    num(g.y1[i]),
                    num(snap.state.s[i]),
                    num(snap.velocity[i]),
                ]);
            }
            // at most 129 x 33 pressure nodes per snapshot
            let si = (g.n1 - 1).div_ceil(128).max(1);
            let sj = (g.n2 - 1).div_ceil(32).max(1);
            for i in (0..g.n1).step_by(si) {
                for j in (0..g.n2).step_by(sj) {
                    pressure.push(vec![num(snap.t), num(g.y1[i]), num(g.eta[j]), num(g.value(i, j))]);
                }
            }
        }
        let tag = eps_tag(eps);
        out.table(
            &format!("solve_boundary_{tag}.csv"),
            &["t", "y1", "S", "S_t"],
            &boundary,
        )?;
        out.table(
            &format!("solve_pressure_{tag}.csv"),
            &["t", "y1", "eta", "p"],
            &pressure,
        )?;
        let mb = reference_mass_balance(traj, &flux);
        let mb_max = mb.iter().map(|m| m.1).fold(0.0, f64::max);
        let angle = angle_preservation_check(traj, 0.1 * flux.length);
        for (t, m) in &mb {
            summary.push(vec![num(eps), num(*t), num(*m)]);
        }
        out.say(format!(
            "eps {eps} ({} x {}): reached t = {:.6} in {} steps{}; max mass-balance error {:.3e}; \
             max |S_y1| near walls {:.3e}",
            traj.snapshots[0].grid.n1,
            traj.snapshots[0].grid.n2,
            traj.last().t,
            traj.steps,
            r.abort_reason.as_ref().map_or(String::new(), |s| format!(" ({s})")),
            mb_max,
            angle.max_slope
        ));
        if !r.completed {
            status = Status::Aborted;
        }
    }
    out.table("solve_mass_balance.csv", &["eps", "t", "relative_error"], &summary)?;
    out.finish(status)
}

/// Everything the convergence sweep measures at one ε.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub eps: f64,
    pub completed: bool,
    pub abort_reason: Option<String>,
    pub steps: usize,
    /// (t, H¹ error, mid-value error) at each stored time.
    pub series: Vec<(f64, f64, f64)>,
    pub record: ErrorRecord,
    /// (t, relative mass-balance error) at each stored time.
    pub mass_balance: Vec<(f64, f64)>,
    pub angle: AngleReport,
    /// Poincaré ratio of p^ε at each stored time.
    pub pressure_ratios: Vec<f64>,
    /// Poincaré ratio of W^ε at the last stored time.
    pub error_ratio: Option<f64>,
    /// Best-constant estimate on the asymptotic domain at t = T.
    pub poincare_constant: f64,
    pub r1_scaled: f64,
    pub r2_scaled: f64,
}

pub fn sweep_entry(cfg: &ExperimentConfig, flux: &BoundaryFluxData, eps: f64) -> Result<SweepEntry> {
    let approx = AsymptoticApproximation::build(
        flux,
        eps,
        AsymptoticOptions {
            layer_terms: None,
            ..cfg.asymptotic_options()
        },
    )?;
    let r = reference_run(cfg, flux, eps)?;
    let traj = &r.trajectory;
    let series = error_series(traj, &approx)?;
    let record = record_from_series(traj, &series, r.completed);
    let pressure_ratios = traj
        .snapshots
        .iter()
        .map(|s| Ok(poincare_diagnostic(&s.grid)?.ratio.unwrap_or(f64::NAN)))
        .collect::<Result<Vec<_>>>()?;
    let last = &traj.last().grid;
    let error_ratio = poincare_ratio(last, &error_field(last, &snapshot_for(last, &approx)?))?.ratio;
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for snap in &approx.snapshots {
        let (a, b) = residual_diagnostics(snap, eps, 17);
        r1 = r1.max(a);
        r2 = r2.max(b);
    }
    Ok(SweepEntry {
        eps,
        completed: r.completed,
        abort_reason: r.abort_reason.clone(),
        steps: traj.steps,
        series,
        record,
        mass_balance: reference_mass_balance(traj, flux),
        angle: angle_preservation_check(traj, 0.1 * flux.length),
        pressure_ratios,
        error_ratio,
        poincare_constant: law_poincare_constant(flux, eps, cfg.grid_size(eps).0.min(257))?,
        r1_scaled: r1 / (eps * eps),
        r2_scaled: r2 / eps.powi(3),
    })
}

/// Poincaré best-constant estimate on the domain of the asymptotic law at t = T.
pub fn law_poincare_constant(flux: &BoundaryFluxData, eps: f64, n1: usize) -> Result<f64> {
    let ev = FreeBoundaryEvolution::new(flux.clone());
    let state = ev.state(n1, flux.horizon, eps)?;
    let s_y = state
        .y1
        .iter()
        .map(|&y| ev.s_y(y, flux.horizon))
        .collect::<Result<Vec<_>>>()?;
    let geo = ColumnGeometry {
        eps,
        s: state.s.clone(),
        s_yy: first_derivative(&s_y, state.spacing()),
        s_y,
    };
    Ok(poincare_constant(&state, &geo, 17, 1e-10)?.0)
}

#[derive(Debug)]
pub struct Sweep {
    pub entries: Vec<SweepEntry>,
    /// Fits over completed runs only.
    pub h1_fit: Result<RateFit>,
    pub mid_fit: Result<RateFit>,
}

/// Runs every ε of the config on its own thread.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Sweep> {
    let flux = cfg.flux_data()?;
    let entries = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .eps
            .iter()
            .map(|&eps| {
                let flux = &flux;
                s.spawn(move || sweep_entry(cfg, flux, eps))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let done: Vec<ErrorRecord> = entries
        .iter()
        .filter(|e| e.completed)
        .map(|e| e.record.clone())
        .collect();
    Ok(Sweep {
        h1_fit: fit_rate(&done, ErrorNorm::H1),
        mid_fit: fit_rate(&done, ErrorNorm::Mid),
        entries,
    })
}

fn fit_text(fit: &Result<RateFit>) -> String {
    match fit {
        Ok(f) => format!(
            "slope {:.4}, intercept {:.4}, r^2 {:.4}",
            f.slope, f.intercept, f.r_squared
        ),
        Err(e) => e.to_string(),
    }
}

pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.eps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "converge needs at least 3 eps values, got {}",
            cfg.eps.len()
        )));
    }
    let sw = sweep(cfg)?;
    let mut out = Output::new(cfg, "converge")?;
    let mut norms = Vec::new();
    let mut table = Vec::new();
    let mut diag = Vec::new();
    for e in &sw.entries {
        for (t, h1, mid) in &e.series {
            norms.push(vec![num(e.eps), num(*t), num(*h1), num(*mid)]);
        }
        let r = &e.record;
        table.push(vec![
            num(r.eps),
            r.n1.to_string(),
            r.n2.to_string(),
            r.t_nodes.to_string(),
            num(r.t_end),
            r.completed.to_string(),
            num(r.sup_t_h1),
            num(r.sup_t_l2_mid),
        ]);
        let mb = e.mass_balance.iter().map(|m| m.1).fold(0.0, f64::max);
        let (pmin, pmax) = ratio_range(&e.pressure_ratios);
        diag.push(vec![
            num(e.eps),
            num(mb),
            num(e.angle.max_slope),
            num(pmin),
            num(pmax),
            e.error_ratio.map_or("nan".into(), num),
            num(e.poincare_constant),
            num(e.r1_scaled),
            num(e.r2_scaled),
        ]);
        out.say(format!(
            "eps {}: {} x {}, {}; sup_t H1 {:.6e}, sup_t mid {:.6e}",
            r.eps,
            r.n1,
            r.n2,
            e.abort_reason.clone().unwrap_or_else(|| "completed".into()),
            r.sup_t_h1,
            r.sup_t_l2_mid
        ));
    }
    let mut fits = Vec::new();
    for (name, fit) in [("H1", &sw.h1_fit), ("mid", &sw.mid_fit)] {
        out.say(format!("{name} fit over completed runs: {}", fit_text(fit)));
        fits.push(match fit {
            Ok(f) => vec![
                name.into(),
                f.eps_list.len().to_string(),
                num(f.slope),
                num(f.intercept),
                num(f.r_squared),
            ],
            Err(_) => vec![name.into(), "0".into(), "nan".into(), "nan".into(), "nan".into()],
        });
    }
    out.table("converge_norms.csv", &["eps", "t", "h1_error", "mid_error"], &norms)?;
    out.table(
        "converge.csv",
        &[
            "eps",
            "n1",
            "n2",
            "t_nodes",
            "t_end",
            "completed",
            "sup_t_h1",
            "sup_t_mid",
        ],
        &table,
    )?;
    out.table(
        "converge_fit.csv",
        &["norm", "points", "slope", "intercept", "r_squared"],
        &fits,
    )?;
    out.table(
        "converge_diagnostics.csv",
        &[
            "eps",
            "mass_balance_max",
            "wall_slope_max",
            "p_ratio_min",
            "p_ratio_max",
            "w_ratio_final",
            "poincare_constant",
            "r1_over_eps2",
            "r2_over_eps3",
        ],
        &diag,
    )?;
    let status = if sw.entries.iter().all(|e| e.completed) {
        Status::Success
    } else {
        Status::Aborted
    };
    out.finish(status)
}

pub fn ratio_range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .filter(|r| r.is_finite())
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)))
}

pub fn cmd_kernel_check(cfg: &ExperimentConfig) -> Result<Report> {
    let k = &cfg.kernel;
    let mut out = Output::new(cfg, "kernel-check")?;
    let mut rows = Vec::new();
    let mut ok = true;
    for &c0 in &k.c0 {
        let kernel = SmoothingKernel::new(c0)?;
        for &t in &k.times {
            for order in [0u32, 1] {
                let v = kernel.identity_integral(t, order)?;
                let expected = SmoothingKernel::identity_expected(t, order);
                let err = if order == 0 {
                    (v - expected).abs() / expected
                } else {
                    v.abs()
                };
                let pass = err <= k.tolerance;
                ok &= pass;
                rows.push(vec![
                    num(c0),
                    num(t),
                    order.to_string(),
                    num(v),
                    num(expected),
                    num(err),
                    pass.to_string(),
                ]);
            }
        }
    }
    out.table(
        "kernel_identity.csv",
        &["c0", "t", "k", "value", "expected", "error", "pass"],
        &rows,
    )?;
    let mut bounds = Vec::new();
    for &c0 in &k.c0 {
        let b = SmoothingKernel::new(c0)?.holder_bounds(k.alpha, &k.times, &k.separations)?;
        out.say(format!(
            "c0 {c0}: time constant {:.6e}, near constant {:.6e}, far constant {:.6e}",
            b.time_constant, b.near_constant, b.far_constant
        ));
        bounds.push(vec![
            num(c0),
            num(b.alpha),
            num(b.time_constant),
            num(b.near_constant),
            num(b.far_constant),
        ]);
    }
    out.table(
        "kernel_bounds.csv",
        &["c0", "alpha", "time_constant", "near_constant", "far_constant"],
        &bounds,
    )?;
    let worst = rows.iter().filter(|r| r[6] == "false").count();
    out.say(format!(
        "{} identity checks, {worst} outside tolerance {:.1e}",
        rows.len(),
        k.tolerance
    ));
    out.finish(if ok { Status::Success } else { Status::ValidationFailed })
}

/// Loads a config file, or the named preset when no file is given.
pub fn load_config(path: Option<&Path>, preset: &str) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => ExperimentConfig::preset(preset),
    }
}
