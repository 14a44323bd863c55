//! Acceptance criteria 1 to 10 on the default preset. Prints one PASS/FAIL
//! line per criterion plus non-gating `info` lines, then fails if any
//! criterion failed.

use std::fs;
use std::time::{Duration, Instant};

use heleshaw::analysis::fit_log_log;
use heleshaw::asymptotics::{AsymptoticApproximation, FreeBoundaryEvolution};
use heleshaw::config::{ExperimentConfig, ReferenceMode};
use heleshaw::experiment::{cmd_asymptotics, cmd_kernel_check, cmd_solve, ratio_range, sweep, Sweep};
use heleshaw::model::{uniform_grid, BoundaryFluxData, CutoffFunction, FreeBoundaryState};
use heleshaw::quadrature::simpson;
use heleshaw::solver::{solve_laplace_step, solve_mapped, ColumnGeometry, LinearSolverKind, MixedProblem, TopData};
use heleshaw::spectral::{EigenBasis, InitialPressureSeries, SmoothingKernel};

const SWEEP_BUDGET: Duration = Duration::from_secs(600);
const PROPERTY_BUDGET: Duration = Duration::from_secs(300);
const H1_SLOPE_MIN: f64 = 0.9;
const H1_R2_MIN: f64 = 0.98;
const MID_SLOPE_MIN: f64 = 0.45;
const KERNEL_REL_TOL: f64 = 1e-6;
const KERNEL_ABS_TOL: f64 = 1e-6;
const REFERENCE_MASS_TOL: f64 = 0.01;
const LAW_MASS_TOL: f64 = 1e-8;
const WALL_SLOPE_TOL: f64 = 1e-3;
const TOP_SLOPE_TOL: f64 = 1e-6;
const A0_TOL: f64 = 1e-10;
const RESIDUAL_SPREAD_MAX: f64 = 0.2;
const POINCARE_SPREAD_MAX: f64 = 2.0;
const GRAM_TOL: f64 = 1e-8;
const MMS_ORDER_MIN: f64 = 1.9;

struct Ledger {
    failed: Vec<u32>,
}

impl Ledger {
    fn verdict(&mut self, id: u32, ok: bool, text: String) {
        println!("criterion {id:>2} {} {text}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn info(text: String) {
    println!("     info    {text}");
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = ratio_range(v);
    hi / lo - 1.0
}

fn sweep_criteria(ledger: &mut Ledger, cfg: &ExperimentConfig) -> Sweep {
    let start = Instant::now();
    let sw = sweep(cfg).expect("sweep");
    let elapsed = start.elapsed();
    for e in &sw.entries {
        let (n1, n2) = cfg.grid_size(e.eps);
        info(format!(
            "eps {:<6} grid {n1}x{n2} completed {} t_end {:.4} sup H1 {:.4e} sup mid {:.4e}{}",
            e.eps,
            e.completed,
            e.record.t_end,
            e.record.sup_t_h1,
            e.record.sup_t_l2_mid,
            e.abort_reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default()
        ));
    }
    let eps: Vec<f64> = sw.entries.iter().map(|e| e.eps).collect();
    let partial = |f: fn(&heleshaw::analysis::ErrorRecord) -> f64| {
        let v: Vec<f64> = sw.entries.iter().map(|e| f(&e.record)).collect();
        fit_log_log(&eps, &v)
            .map(|f| format!("slope {:.3} r^2 {:.3}", f.slope, f.r_squared))
            .unwrap_or_else(|e| e.to_string())
    };
    info(format!(
        "fit over all runs including aborted ones: H1 {}",
        partial(|r| r.sup_t_h1)
    ));
    info(format!(
        "fit over all runs including aborted ones: mid {}",
        partial(|r| r.sup_t_l2_mid)
    ));

    let h1 = match &sw.h1_fit {
        Ok(f) => (
            f.slope >= H1_SLOPE_MIN && f.r_squared >= H1_R2_MIN && elapsed < SWEEP_BUDGET,
            format!("slope {:.3} r^2 {:.3}", f.slope, f.r_squared),
        ),
        Err(e) => (false, format!("no fit over completed runs: {e}")),
    };
    ledger.verdict(
        1,
        h1.0,
        format!(
            "H1 rate: {} (need slope >= {H1_SLOPE_MIN}, r^2 >= {H1_R2_MIN}), sweep {:.0}s of {}s",
            h1.1,
            elapsed.as_secs_f64(),
            SWEEP_BUDGET.as_secs()
        ),
    );
    let mid = match &sw.mid_fit {
        Ok(f) => (f.slope >= MID_SLOPE_MIN, format!("slope {:.3}", f.slope)),
        Err(e) => (false, format!("no fit over completed runs: {e}")),
    };
    ledger.verdict(2, mid.0, format!("mid-value rate: {} (need >= {MID_SLOPE_MIN})", mid.1));
    sw
}

fn kernel_criterion(ledger: &mut Ledger) {
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for c0 in [0.5, 1.0, 3.0] {
        let k = SmoothingKernel::new(c0).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let v = k.identity_integral(t, 0).unwrap();
            worst_rel = worst_rel.max((v / SmoothingKernel::identity_expected(t, 0) - 1.0).abs());
            worst_abs = worst_abs.max(k.identity_integral(t, 1).unwrap().abs());
        }
    }
    ledger.verdict(
        3,
        worst_rel <= KERNEL_REL_TOL && worst_abs <= KERNEL_ABS_TOL,
        format!("kernel identity: worst relative {worst_rel:.2e}, k = 1 worst absolute {worst_abs:.2e}"),
    );
}

fn initial_pressure_criterion(ledger: &mut Ledger, flux: &BoundaryFluxData) {
    let (eps, n) = (0.2, 512);
    let st = FreeBoundaryState::flat(n, flux.length, eps).unwrap();
    let g = solve_laplace_step(&st, flux, n, 1e-12, LinearSolverKind::Auto).unwrap();
    let s = InitialPressureSeries::build(flux, eps, 64).unwrap();
    let mut err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            err = err.max((g.value(i, j) - s.value(g.y1[i], g.y2(i, j))).abs());
        }
    }
    let h = flux.length / (n - 1) as f64;
    let tol = (3.0 * h * h).max(s.tail_bound());
    ledger.verdict(
        4,
        err <= tol,
        format!("spectral p0 vs {n}x{n} solve at eps {eps}: max diff {err:.3e}, tolerance {tol:.3e}"),
    );
}

fn mass_criterion(ledger: &mut Ledger, sw: &Sweep, flux: &BoundaryFluxData, times: &[f64]) {
    let reference = sw
        .entries
        .iter()
        .flat_map(|e| e.mass_balance.iter().map(|m| m.1))
        .fold(0.0f64, f64::max);
    let ev = FreeBoundaryEvolution::new(flux.clone());
    let law = times
        .iter()
        .map(|&t| ev.mass_balance_residual(t).unwrap().abs())
        .fold(0.0f64, f64::max);
    ledger.verdict(
        5,
        reference <= REFERENCE_MASS_TOL && law <= LAW_MASS_TOL,
        format!(
            "mass balance: reference worst {:.3}%, asymptotic law worst {law:.2e}",
            100.0 * reference
        ),
    );
}

fn angle_criterion(ledger: &mut Ledger, sw: &Sweep, flux: &BoundaryFluxData, times: &[f64]) {
    let ev = FreeBoundaryEvolution::new(flux.clone());
    let l = flux.length;
    let mut law = 0.0f64;
    for &t in times {
        for y in uniform_grid(0.0, l / 5.0, 201)
            .into_iter()
            .chain(uniform_grid(0.8 * l, l, 201))
        {
            law = law.max(ev.s_y(y, t).unwrap().abs());
        }
    }
    let slopes: Vec<f64> = sw.entries.iter().map(|e| e.angle.max_slope).collect();
    let decreasing = slopes.windows(2).all(|w| w[1] <= w[0]);
    let small = slopes.iter().all(|&s| s <= WALL_SLOPE_TOL);
    let list: Vec<String> = slopes.iter().map(|s| format!("{s:.3e}")).collect();
    ledger.verdict(
        6,
        law == 0.0 && small && decreasing,
        format!(
            "right angles: law max |S_y| near walls {law:.1e}; reference max |S_y| on outer tenths [{}] (need <= {WALL_SLOPE_TOL:.0e}, decreasing)",
            list.join(", ")
        ),
    );
}

fn corrector_criterion(ledger: &mut Ledger, cfg: &ExperimentConfig, flux: &BoundaryFluxData) {
    let mut top = 0.0f64;
    let mut a0 = 0.0f64;
    for &eps in &cfg.eps {
        let approx = AsymptoticApproximation::build(flux, eps, cfg.asymptotic_options()).unwrap();
        top = top.max(approx.max_top_slope_residual());
        a0 = a0.max(approx.max_layer_a0().expect("layers requested"));
    }
    ledger.verdict(
        7,
        top <= TOP_SLOPE_TOL && a0 <= A0_TOL,
        format!("corrector top slope worst {top:.2e}, layer a0 worst {a0:.2e}"),
    );
}

fn residual_criterion(ledger: &mut Ledger, sw: &Sweep) {
    let r1: Vec<f64> = sw.entries.iter().map(|e| e.r1_scaled).collect();
    let r2: Vec<f64> = sw.entries.iter().map(|e| e.r2_scaled).collect();
    let (s1, s2) = (spread(&r1), spread(&r2));
    ledger.verdict(
        8,
        s1 < RESIDUAL_SPREAD_MAX && s2 < RESIDUAL_SPREAD_MAX,
        format!(
            "R1/eps^2 {:.4e} spread {:.1}%, R2/eps^3 {:.4e} spread {:.1}%",
            r1[0],
            100.0 * s1,
            r2[0],
            100.0 * s2
        ),
    );
    info("u2 does not depend on eps, so both scaled residuals are constant by construction".into());
}

fn poincare_criterion(ledger: &mut Ledger, sw: &Sweep) {
    let c: Vec<f64> = sw.entries.iter().map(|e| e.poincare_constant).collect();
    let (lo, hi) = ratio_range(&c);
    ledger.verdict(
        9,
        hi / lo < POINCARE_SPREAD_MAX,
        format!("Poincare constant in [{lo:.4}, {hi:.4}], ratio {:.3}", hi / lo),
    );
    let p: Vec<f64> = sw
        .entries
        .iter()
        .flat_map(|e| e.pressure_ratios.iter().copied())
        .filter(|r| r.is_finite())
        .collect();
    let (plo, phi) = ratio_range(&p);
    info(format!(
        "Poincare ratio of the reference pressure in [{plo:.4}, {phi:.4}]"
    ));
}

// manufactured harmonic p* = 0.1 e^{2y₁} cos 2y₂ on a wavy strip with a Dirichlet top
fn mms_error(n1: usize, n2: usize) -> f64 {
    let eps = 0.2;
    let p = |a: f64, b: f64| 0.1 * (2.0 * a).exp() * (2.0 * b).cos();
    let px = |a: f64, b: f64| 0.2 * (2.0 * a).exp() * (2.0 * b).cos();
    let py = |a: f64, b: f64| -0.2 * (2.0 * a).exp() * (2.0 * b).sin();
    let s = |y: f64| 1.0 + 0.1 * (2.0 * y).sin();
    let y1 = uniform_grid(0.0, 1.0, n1);
    let geo = ColumnGeometry {
        eps,
        s: y1.iter().map(|&y| s(y)).collect(),
        s_y: y1.iter().map(|y| 0.2 * (2.0 * y).cos()).collect(),
        s_yy: y1.iter().map(|y| -0.4 * (2.0 * y).sin()).collect(),
    };
    let left = |y2: f64| -px(0.0, y2);
    let right = |y2: f64| px(1.0, y2);
    let bottom = |y: f64| -py(y, 0.0);
    let top = |y: f64| p(y, eps * s(y));
    let problem = MixedProblem {
        left: &left,
        right: &right,
        bottom: &bottom,
        source: None,
        top: TopData::Dirichlet(&top),
    };
    let (q, _) = solve_mapped(&geo, &y1, n2, &problem, 1e-12, LinearSolverKind::BandLu).unwrap();
    let eta = uniform_grid(0.0, 1.0, n2);
    let mut err = 0.0f64;
    for i in 0..n1 {
        for (j, e) in eta.iter().enumerate() {
            err = err.max((q[i * n2 + j] - p(y1[i], e * geo.height(i))).abs());
        }
    }
    err
}

fn property_criterion(ledger: &mut Ledger, flux: &BoundaryFluxData) {
    let start = Instant::now();
    let mut notes = Vec::new();

    let mut gram = 0.0f64;
    for length in [0.3, 1.0, 2.7] {
        for basis in [EigenBasis::neumann(length).unwrap(), EigenBasis::mixed(length).unwrap()] {
            let n = 4097;
            let h = length / (n - 1) as f64;
            let table: Vec<Vec<f64>> = (0..16)
                .map(|m| (0..n).map(|k| basis.eigenfunction(m, k as f64 * h)).collect())
                .collect();
            for i in 0..16 {
                for j in 0..16 {
                    let v: Vec<f64> = table[i].iter().zip(&table[j]).map(|(a, b)| a * b).collect();
                    gram = gram.max((simpson(&v, h) - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    notes.push((gram <= GRAM_TOL, format!("Gram {gram:.1e}")));

    let mut faces = true;
    for eps in [0.2, 0.1, 0.05] {
        let s = InitialPressureSeries::build(flux, eps, 64).unwrap();
        let tail = s.tail_bound();
        let h = 1e-3 * eps;
        let tol = 1e-4 * eps + tail;
        let d = |f: &dyn Fn(f64) -> f64| (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
        for y in uniform_grid(0.0, flux.length, 101) {
            faces &= s.value(y, eps).abs() <= tail;
        }
        for k in 1..20 {
            let y2 = eps * k as f64 / 20.0;
            faces &= (d(&|x| s.value(x, y2)) + flux.left_density(y2 / eps, 0.0)).abs() <= tol;
            faces &= (-d(&|x| s.value(flux.length - x, y2)) - flux.right_density(y2 / eps, 0.0)).abs() <= tol;
        }
        for k in 1..40 {
            let y1 = flux.length * k as f64 / 40.0;
            faces &= (d(&|x| s.value(y1, x)) + eps * flux.bottom_density(y1, 0.0)).abs() <= tol;
        }
    }
    notes.push((faces, format!("faces {}", if faces { "ok" } else { "violated" })));

    let mut cutoff = true;
    for c in [
        CutoffFunction::chi1(1.0),
        CutoffFunction::chi2(),
        CutoffFunction::new(0.1, 0.15, 0.5, 0.9).unwrap(),
    ] {
        for x in uniform_grid(-0.5, 1.5, 4001) {
            let v = c.value(x);
            cutoff &= (0.0..=1.0).contains(&v);
            if x <= c.support_lo || x >= c.support_hi {
                cutoff &= v == 0.0;
            }
            if x >= c.plateau_lo && x <= c.plateau_hi {
                cutoff &= v == 1.0;
            }
        }
    }
    notes.push((cutoff, format!("cutoff {}", if cutoff { "ok" } else { "violated" })));

    let mut cfg = ExperimentConfig::preset("default").unwrap();
    cfg.eps = vec![0.2];
    cfg.grid.t_nodes = 5;
    cfg.grid.n1 = 33;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for d in &dirs {
        cfg.output_dir = d.path().to_string_lossy().into_owned();
        let mut files = Vec::new();
        files.extend(cmd_kernel_check(&cfg).unwrap().files);
        files.extend(cmd_asymptotics(&cfg).unwrap().files);
        files.extend(cmd_solve(&cfg).unwrap().files);
        files.sort();
        outputs.push(
            files
                .iter()
                .map(|f| (f.file_name().unwrap().to_owned(), fs::read(f).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    let identical = outputs[0] == outputs[1] && !outputs[0].is_empty();
    notes.push((
        identical,
        format!("{} files byte-identical {identical}", outputs[0].len()),
    ));

    let e1 = mms_error(17, 9);
    let e2 = mms_error(33, 17);
    let order = (e1 / e2).log2();
    notes.push((order >= MMS_ORDER_MIN, format!("MMS order {order:.3}")));

    let elapsed = start.elapsed();
    let ok = notes.iter().all(|n| n.0) && elapsed < PROPERTY_BUDGET;
    let text: Vec<String> = notes.into_iter().map(|n| n.1).collect();
    ledger.verdict(
        10,
        ok,
        format!(
            "properties: {} in {:.1}s of {}s",
            text.join(", "),
            elapsed.as_secs_f64(),
            PROPERTY_BUDGET.as_secs()
        ),
    );
}

fn relaxed_supplement(cfg: &ExperimentConfig) {
    let mut relaxed = cfg.clone();
    relaxed.solver.reference = ReferenceMode::Relaxed;
    relaxed.grid.t_nodes = 17;
    let start = Instant::now();
    let sw = sweep(&relaxed).expect("relaxed sweep");
    let fit = |f: &heleshaw::error::Result<heleshaw::analysis::RateFit>| match f {
        Ok(f) => format!("slope {:.3} r^2 {:.3}", f.slope, f.r_squared),
        Err(e) => e.to_string(),
    };
    info(format!(
        "relaxed reference (not gating, 17 t-nodes, {:.0}s): H1 {}, mid {}",
        start.elapsed().as_secs_f64(),
        fit(&sw.h1_fit),
        fit(&sw.mid_fit)
    ));
    for e in &sw.entries {
        info(format!(
            "relaxed eps {:<6} sup H1 {:.4e} sup mid {:.4e} wall |S_y| {:.1e}",
            e.eps, e.record.sup_t_h1, e.record.sup_t_l2_mid, e.angle.max_slope
        ));
    }
}

#[test]
fn acceptance() {
    let cfg = ExperimentConfig::preset("default").unwrap();
    assert_eq!(cfg.solver.reference, ReferenceMode::Dirichlet);
    let flux = cfg.flux_data().unwrap();
    let times = cfg.output_times();
    let mut ledger = Ledger { failed: Vec::new() };

    let sw = sweep_criteria(&mut ledger, &cfg);
    kernel_criterion(&mut ledger);
    initial_pressure_criterion(&mut ledger, &flux);
    mass_criterion(&mut ledger, &sw, &flux, &times);
    angle_criterion(&mut ledger, &sw, &flux, &times);
    corrector_criterion(&mut ledger, &cfg, &flux);
    residual_criterion(&mut ledger, &sw);
    poincare_criterion(&mut ledger, &sw);
    property_criterion(&mut ledger, &flux);
    relaxed_supplement(&cfg);

    println!("failed criteria: {:?}", ledger.failed);
    assert!(
        ledger.failed.is_empty(),
        "acceptance criteria failed: {:?}",
        ledger.failed
    );
}
