//! Second-order finite differences for the mapped mixed problem on the
//! (y₁, η) rectangle. Neumann data on the walls and the bottom enter
//! through ghost nodes; the top row carries either Dirichlet values or
//! the oblique flux condition p_{y₂} − H'p_{y₁} = D. In the oblique case
//! the system is pinned at one node and the result shifted to zero
//! arc-length mean on the top.

use crate::error::{Error, Result};
use crate::model::{uniform_grid, BoundaryFluxData, FreeBoundaryState};
use crate::solver::linear::{gmres, norm, BandLu, CsrMatrix};
use crate::solver::mapping::ColumnGeometry;
use crate::solver::separable::SeparablePreconditioner;

/// Band factorisations larger than this switch `Auto` to GMRES.
pub const BAND_MEMORY_LIMIT: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolverKind {
    Auto,
    BandLu,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub kind: LinearSolverKind,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Uniform source absorbing the discrete incompatibility of an oblique
    /// top; zero for Dirichlet.
    pub source_shift: f64,
}

/// Top boundary treatment.
pub enum TopData<'a> {
    /// p = g(y₁) on η = 1.
    Dirichlet(&'a dyn Fn(f64) -> f64),
    /// p_{y₂} − H' p_{y₁} = D(y₁) on η = 1, zero arc-length mean.
    Oblique(&'a dyn Fn(f64) -> f64),
}

/// Data of a mixed problem Δp = f. Wall and bottom closures give the outward
/// normal derivative, walls as functions of y₂, bottom as a function of y₁.
pub struct MixedProblem<'a> {
    pub left: &'a dyn Fn(f64) -> f64,
    pub right: &'a dyn Fn(f64) -> f64,
    pub bottom: &'a dyn Fn(f64) -> f64,
    pub source: Option<&'a dyn Fn(f64, f64) -> f64>,
    pub top: TopData<'a>,
}

/// Pressure on the mapped grid, row-major in y₁ with η fastest.
#[derive(Debug, Clone)]
pub struct MappedPressureGrid {
    pub eps: f64,
    pub t: f64,
    pub gamma: f64,
    pub n1: usize,
    pub n2: usize,
    pub y1: Vec<f64>,
    pub eta: Vec<f64>,
    pub p_values: Vec<f64>,
    pub state: FreeBoundaryState,
    pub geometry: ColumnGeometry,
    pub report: SolveReport,
}

#[derive(Clone, Default)]
struct Lin {
    terms: Vec<(usize, f64)>,
    c: f64,
}

impl Lin {
    fn var(k: usize) -> Self {
        Self {
            terms: vec![(k, 1.0)],
            c: 0.0,
        }
    }

    fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), c }
    }

    fn axpy(&mut self, w: f64, other: &Lin) {
        if w == 0.0 {
            return;
        }
        self.terms.extend(other.terms.iter().map(|&(k, v)| (k, w * v)));
        self.c += w * other.c;
    }

    fn combo(parts: &[(f64, &Lin)]) -> Lin {
        let mut out = Lin::default();
        for (w, l) in parts {
            out.axpy(*w, l);
        }
        out
    }
}

struct Assembler<'a> {
    n1: usize,
    n2: usize,
    m: usize,
    h1: f64,
    h2: f64,
    y1: &'a [f64],
    eta: Vec<f64>,
    geo: &'a ColumnGeometry,
    problem: &'a MixedProblem<'a>,
    oblique: bool,
}

impl<'a> Assembler<'a> {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    fn node(&self, i: usize, j: usize) -> Lin {
        match self.problem.top {
            TopData::Dirichlet(g) if j == self.n2 - 1 => Lin::constant(g(self.y1[i])),
            _ => Lin::var(self.idx(i, j)),
        }
    }

    fn hp(&self, i: usize) -> f64 {
        self.geo.eps * self.geo.s_y[i]
    }

    fn q(&self, i: isize, j: isize) -> Lin {
        let (n1, n2) = (self.n1 as isize, self.n2 as isize);
        if i < 0 {
            let mut f = self.q(1, j);
            f.axpy(-2.0 * self.h1, &self.q1_wall(0, j as usize));
            return f;
        }
        if i >= n1 {
            let mut f = self.q(n1 - 2, j);
            f.axpy(2.0 * self.h1, &self.q1_wall(self.n1 - 1, j as usize));
            return f;
        }
        if j < 0 {
            let mut f = self.q(i, 1);
            f.axpy(-2.0 * self.h2, &self.q2_bottom(i as usize));
            return f;
        }
        if j >= n2 {
            let mut f = self.q(i, n2 - 2);
            f.axpy(2.0 * self.h2, &self.q2_top(i as usize));
            return f;
        }
        self.node(i as usize, j as usize)
    }

    fn q2_bottom(&self, i: usize) -> Lin {
        Lin::constant(-self.geo.height(i) * (self.problem.bottom)(self.y1[i]))
    }

    fn q2_col(&self, i: usize, j: usize) -> Lin {
        if j == 0 {
            return self.q2_bottom(i);
        }
        if self.oblique && j == self.n2 - 1 {
            return self.q2_top(i);
        }
        let (ii, jj) = (i as isize, j as isize);
        Lin::combo(&[
            (0.5 / self.h2, &self.q(ii, jj + 1)),
            (-0.5 / self.h2, &self.q(ii, jj - 1)),
        ])
    }

    /// Term of q₁ on a wall that comes from the Neumann data.
    fn wall_term(&self, i: usize, y2: f64) -> f64 {
        if i == 0 {
            -(self.problem.left)(y2)
        } else {
            (self.problem.right)(y2)
        }
    }

    fn q1_wall(&self, i: usize, j: usize) -> Lin {
        let h = self.geo.height(i);
        let eta = self.eta[j];
        let mut f = Lin::constant(self.wall_term(i, eta * h));
        if eta != 0.0 {
            f.axpy(eta * self.hp(i) / h, &self.q2_col(i, j));
        }
        f
    }

    fn q1_top(&self, i: usize) -> Lin {
        let top = self.n2 - 1;
        let n1 = self.n1;
        let inv = 0.5 / self.h1;
        if i == 0 {
            Lin::combo(&[
                (-3.0 * inv, &self.node(0, top)),
                (4.0 * inv, &self.node(1, top)),
                (-inv, &self.node(2, top)),
            ])
        } else if i == n1 - 1 {
            Lin::combo(&[
                (3.0 * inv, &self.node(n1 - 1, top)),
                (-4.0 * inv, &self.node(n1 - 2, top)),
                (inv, &self.node(n1 - 3, top)),
            ])
        } else {
            Lin::combo(&[(inv, &self.node(i + 1, top)), (-inv, &self.node(i - 1, top))])
        }
    }

    fn q2_top(&self, i: usize) -> Lin {
        let TopData::Oblique(d) = self.problem.top else {
            unreachable!("oblique ghost requested for a Dirichlet top")
        };
        let (h, hp) = (self.geo.height(i), self.hp(i));
        let scale = h / (1.0 + hp * hp);
        let mut f = Lin::constant(scale * d(self.y1[i]));
        f.axpy(scale * hp, &self.q1_top(i));
        f
    }

    fn row(&self, i: usize, j: usize) -> Result<(Vec<(usize, f64)>, f64)> {
        let (ii, jj) = (i as isize, j as isize);
        let eta = self.eta[j];
        let h = self.geo.height(i);
        let c = self.geo.coefficients(i, eta)?;
        let centre = self.node(i, j);
        let q11 = Lin::combo(&[
            (1.0 / (self.h1 * self.h1), &self.q(ii + 1, jj)),
            (-2.0 / (self.h1 * self.h1), &centre),
            (1.0 / (self.h1 * self.h1), &self.q(ii - 1, jj)),
        ]);
        let q22 = Lin::combo(&[
            (1.0 / (self.h2 * self.h2), &self.q(ii, jj + 1)),
            (-2.0 / (self.h2 * self.h2), &centre),
            (1.0 / (self.h2 * self.h2), &self.q(ii, jj - 1)),
        ]);
        let q2 = self.q2_col(i, j);
        let mut op = Lin::combo(&[(1.0, &q11), (c.g22, &q22), (c.b, &q2)]);
        if c.g12 != 0.0 {
            let q12 = if i == 0 || i == self.n1 - 1 {
                // η-derivative of the wall condition q₁ = w(ηH) + (ηH'/H) q_η
                let y2 = eta * h;
                let d = 1e-5 * h;
                let dw = h * (self.wall_term(i, y2 + d) - self.wall_term(i, y2 - d)) / (2.0 * d);
                let ratio = self.hp(i) / h;
                let mut f = Lin::constant(dw);
                f.axpy(ratio, &q2);
                f.axpy(eta * ratio, &q22);
                f
            } else {
                let w = 0.25 / (self.h1 * self.h2);
                Lin::combo(&[
                    (w, &self.q(ii + 1, jj + 1)),
                    (-w, &self.q(ii + 1, jj - 1)),
                    (-w, &self.q(ii - 1, jj + 1)),
                    (w, &self.q(ii - 1, jj - 1)),
                ])
            };
            op.axpy(2.0 * c.g12, &q12);
        }
        let f = self.problem.source.map_or(0.0, |s| s(self.y1[i], eta * h));
        Ok((op.terms, f - op.c))
    }
}

/// Solves a mixed problem on the mapped grid with `n2` rows in η.
/// Returns the full n1 × n2 array (top row included) and the solve report.
pub fn solve_mapped(
    geo: &ColumnGeometry,
    y1: &[f64],
    n2: usize,
    problem: &MixedProblem,
    tolerance: f64,
    kind: LinearSolverKind,
) -> Result<(Vec<f64>, SolveReport)> {
    let n1 = y1.len();
    if n1 < 4 || n2 < 4 {
        return Err(Error::Resolution(format!("mapped grid {n1} x {n2} is too small")));
    }
    if geo.s.len() != n1 {
        return Err(Error::InvalidParameter("geometry and grid sizes differ".into()));
    }
    let oblique = matches!(problem.top, TopData::Oblique(_));
    let m = if oblique { n2 } else { n2 - 1 };
    let asm = Assembler {
        n1,
        n2,
        m,
        h1: y1[1] - y1[0],
        h2: 1.0 / (n2 - 1) as f64,
        y1,
        eta: uniform_grid(0.0, 1.0, n2),
        geo,
        problem,
        oblique,
    };
    let n = n1 * m;
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n1 {
        for j in 0..m {
            let (r, b) = asm.row(i, j)?;
            rows.push(r);
            rhs.push(b);
        }
    }
    // the oblique problem is singular: pin one node and absorb the discrete
    // incompatibility in a uniform source λ so that the pinned row still holds
    let pin = asm.idx(0, n2 - 1);
    let pin_row = if oblique {
        let original = std::mem::replace(&mut rows[pin], vec![(pin, 1.0)]);
        Some((original, std::mem::replace(&mut rhs[pin], 0.0)))
    } else {
        None
    };
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mapped right-hand side".into()));
    }
    let a = CsrMatrix::from_rows(rows);
    let (kl, ku) = a.bandwidths();
    let chosen = match kind {
        LinearSolverKind::Auto if oblique || BandLu::memory_estimate(n, kl, ku) <= BAND_MEMORY_LIMIT => {
            LinearSolverKind::BandLu
        }
        LinearSolverKind::Auto => LinearSolverKind::Gmres,
        LinearSolverKind::Gmres if oblique => {
            return Err(Error::InvalidParameter(
                "GMRES is only available with a Dirichlet top".into(),
            ))
        }
        k => k,
    };
    let (x, report) = match chosen {
        LinearSolverKind::BandLu => {
            let lu = BandLu::factor(&a)?;
            let (mut x, sweeps, rel) = refined_solve(&lu, &a, &rhs, tolerance)?;
            let mut source_shift = 0.0;
            if let Some((row, b_pin)) = pin_row {
                let mut ones = vec![1.0; n];
                ones[pin] = 0.0;
                let (z, _, _) = refined_solve(&lu, &a, &ones, tolerance)?;
                let dot = |v: &[f64]| row.iter().map(|&(k, c)| c * v[k]).sum::<f64>();
                let lambda = (b_pin - dot(&x)) / (1.0 - dot(&z));
                x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi -= lambda * zi);
                source_shift = lambda;
            }
            (
                x,
                SolveReport {
                    kind: chosen,
                    iterations: sweeps,
                    relative_residual: rel,
                    source_shift,
                },
            )
        }
        _ => {
            let heights: Vec<f64> = (0..n1).map(|i| geo.height(i)).collect();
            let pre = SeparablePreconditioner::new(&heights, asm.h1, m, asm.h2);
            let mut x = vec![0.0; n];
            let rep = gmres(&a, &rhs, &mut x, |r, z| pre.apply(r, z), tolerance, 40, 2000)?;
            (
                x,
                SolveReport {
                    kind: chosen,
                    iterations: rep.iterations,
                    relative_residual: rep.relative_residual,
                    source_shift: 0.0,
                },
            )
        }
    };
    let mut p = vec![0.0; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            p[i * n2 + j] = if j < m {
                x[i * m + j]
            } else if let TopData::Dirichlet(g) = problem.top {
                g(y1[i])
            } else {
                unreachable!()
            };
        }
    }
    if oblique {
        let mean = top_mean(&p, geo, y1, n2);
        p.iter_mut().for_each(|v| *v -= mean);
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mapped pressure".into()));
    }
    Ok((p, report))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Band LU solve with up to four sweeps of iterative refinement.
fn refined_solve(lu: &BandLu, a: &CsrMatrix, rhs: &[f64], tolerance: f64) -> Result<(Vec<f64>, usize, f64)> {
    let n = rhs.len();
    let b_norm = norm(rhs).max(f64::MIN_POSITIVE);
    let a_inf = a.inf_norm();
    let mut x = rhs.to_vec();
    lu.solve(&mut x);
    let mut r = vec![0.0; n];
    let mut rel = f64::INFINITY;
    let mut sweeps = 0;
    loop {
        a.matvec(&x, &mut r);
        r.iter_mut().zip(rhs).for_each(|(ri, bi)| *ri = bi - *ri);
        rel = rel.min(norm(&r) / b_norm);
        // accept the rounding floor: normwise backward error at machine precision
        let backward = inf_norm(&r) / (a_inf * inf_norm(&x) + inf_norm(rhs)).max(f64::MIN_POSITIVE);
        if rel <= tolerance || backward <= 64.0 * f64::EPSILON {
            return Ok((x, sweeps, rel));
        }
        if sweeps == 4 {
            return Err(Error::LinearSolver(format!(
                "band LU residual {rel:.3e} above tolerance {tolerance:.1e}"
            )));
        }
        lu.solve(&mut r);
        x.iter_mut().zip(&r).for_each(|(xi, di)| *xi += di);
        sweeps += 1;
    }
}

/// Arc-length mean of the top row, trapezoid rule with weight √(1 + H'²).
fn top_mean(p: &[f64], geo: &ColumnGeometry, y1: &[f64], n2: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..y1.len() {
        let dy = y1[i] - y1[i - 1];
        let w = |k: usize| (1.0 + (geo.eps * geo.s_y[k]).powi(2)).sqrt();
        num += 0.5 * dy * (w(i - 1) * p[(i - 1) * n2 + n2 - 1] + w(i) * p[i * n2 + n2 - 1]);
        den += 0.5 * dy * (w(i - 1) + w(i));
    }
    num / den
}

/// Which condition the reference pressure satisfies on the free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopCondition {
    /// p = 0 (zero surface tension).
    Dirichlet,
    /// p_{y₂} − εS_{y₁}p_{y₁} = −εγS_t with prescribed S_t and zero Γ-mean.
    StefanFluxMeanZero,
}

/// Dirichlet pressure solve for the boundary flux of `flux` at the state's time.
pub fn solve_laplace_step(
    state: &FreeBoundaryState,
    flux: &BoundaryFluxData,
    n2: usize,
    tolerance: f64,
    kind: LinearSolverKind,
) -> Result<MappedPressureGrid> {
    let geo = ColumnGeometry::from_state(state)?;
    let (eps, t) = (state.eps, state.t);
    let left = |y2: f64| flux.left_density(y2 / eps, t);
    let right = |y2: f64| flux.right_density(y2 / eps, t);
    let bottom = |y1: f64| flux.bottom_flux(eps, y1, t);
    let zero = |_: f64| 0.0;
    let problem = MixedProblem {
        left: &left,
        right: &right,
        bottom: &bottom,
        source: None,
        top: TopData::Dirichlet(&zero),
    };
    let (p, report) = solve_mapped(&geo, &state.y1, n2, &problem, tolerance, kind)?;
    Ok(MappedPressureGrid::new(state.clone(), geo, flux.gamma, n2, p, report))
}

/// Solve with the oblique Stefan flux on a prescribed boundary: `geo` carries
/// S and its derivatives, `s_t` the boundary velocity at the nodes.
pub fn solve_flux_step(
    state: &FreeBoundaryState,
    geo: ColumnGeometry,
    s_t: &[f64],
    flux: &BoundaryFluxData,
    n2: usize,
    tolerance: f64,
) -> Result<MappedPressureGrid> {
    let (eps, t) = (state.eps, state.t);
    let gamma = flux.gamma;
    let h = state.spacing();
    let left = |y2: f64| flux.left_density(y2 / eps, t);
    let right = |y2: f64| flux.right_density(y2 / eps, t);
    let bottom = |y1: f64| flux.bottom_flux(eps, y1, t);
    let top = |y1: f64| {
        let k = ((y1 / h).round() as usize).min(s_t.len() - 1);
        -eps * gamma * s_t[k]
    };
    let problem = MixedProblem {
        left: &left,
        right: &right,
        bottom: &bottom,
        source: None,
        top: TopData::Oblique(&top),
    };
    let (p, report) = solve_mapped(&geo, &state.y1, n2, &problem, tolerance, LinearSolverKind::BandLu)?;
    Ok(MappedPressureGrid::new(state.clone(), geo, gamma, n2, p, report))
}

impl MappedPressureGrid {
    pub fn new(
        state: FreeBoundaryState,
        geometry: ColumnGeometry,
        gamma: f64,
        n2: usize,
        p_values: Vec<f64>,
        report: SolveReport,
    ) -> Self {
        Self {
            eps: state.eps,
            t: state.t,
            gamma,
            n1: state.n(),
            n2,
            y1: state.y1.clone(),
            eta: uniform_grid(0.0, 1.0, n2),
            p_values,
            state,
            geometry,
            report,
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.p_values[i * self.n2 + j]
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.p_values[i * self.n2..(i + 1) * self.n2]
    }

    /// Physical height y₂ of node (i, j).
    pub fn y2(&self, i: usize, j: usize) -> f64 {
        self.eta[j] * self.geometry.height(i)
    }

    pub fn h1(&self) -> f64 {
        self.y1[1] - self.y1[0]
    }

    pub fn h2(&self) -> f64 {
        self.eta[1] - self.eta[0]
    }

    /// (q₁, q_η): central differences inside, second-order one-sided on edges.
    pub fn mapped_derivatives(&self, i: usize, j: usize) -> (f64, f64) {
        let d = |v: &dyn Fn(usize) -> f64, k: usize, n: usize, h: f64| {
            if k == 0 {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h)
            } else {
                (v(k + 1) - v(k - 1)) / (2.0 * h)
            }
        };
        let q1 = d(&|a| self.value(a, j), i, self.n1, self.h1());
        let q2 = d(&|b| self.value(i, b), j, self.n2, self.h2());
        (q1, q2)
    }

    /// ∇_y p at node (i, j).
    pub fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let (q1, q2) = self.mapped_derivatives(i, j);
        self.geometry.physical_gradient(i, self.eta[j], q1, q2)
    }

    /// Bilinear interpolation in (y₁, η).
    pub fn eval(&self, y1: f64, y2: f64) -> f64 {
        let h1 = self.h1();
        let a = ((y1 / h1).floor().max(0.0) as usize).min(self.n1 - 2);
        let s = ((y1 - self.y1[a]) / h1).clamp(0.0, 1.0);
        let height = (1.0 - s) * self.geometry.height(a) + s * self.geometry.height(a + 1);
        let eta = (y2 / height).clamp(0.0, 1.0);
        let h2 = self.h2();
        let b = ((eta / h2).floor() as usize).min(self.n2 - 2);
        let r = ((eta - self.eta[b]) / h2).clamp(0.0, 1.0);
        (1.0 - s) * ((1.0 - r) * self.value(a, b) + r * self.value(a, b + 1))
            + s * ((1.0 - r) * self.value(a + 1, b) + r * self.value(a + 1, b + 1))
    }

    pub fn max_abs(&self) -> f64 {
        self.p_values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
