//! Exact-error computation against manufactured solutions, the residual
//! a posteriori estimator, convergence rates, and CSV study reports.
//!
//! The velocity error is measured in the norm whose square is
//! ||e||^2 + ||rot e||^2 + ||div e||^2; vorticity and pressure errors in L2,
//! the pressure error after removing its mean. All error integrals use a
//! quadrature rule two degrees above the assembly rule.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::problem::{ProblemData, ScalarField, VectorField};
use crate::quadrature::{quadrature_rule, QuadratureRule, MAX_DEGREE};
use crate::solver::SolutionTriple;
use crate::spaces::{RefTables, SpaceSet};

/// Discrete state sampled at one physical point.
#[derive(Debug, Clone, Copy)]
pub struct SampledState {
    pub u: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub w: f64,
    pub grad_w: [f64; 2],
    pub p: f64,
    pub grad_p: [f64; 2],
}

impl SampledState {
    pub fn div_u(&self) -> f64 {
        self.grad_u[0][0] + self.grad_u[1][1]
    }

    pub fn rot_u(&self) -> f64 {
        self.grad_u[1][0] - self.grad_u[0][1]
    }
}

/// Cellwise evaluator of a discrete solution triple.
pub struct DiscreteSolution<'a> {
    pub spaces: &'a SpaceSet,
    pub triple: &'a SolutionTriple,
}

impl<'a> DiscreteSolution<'a> {
    pub fn new(spaces: &'a SpaceSet, triple: &'a SolutionTriple) -> Self {
        Self { spaces, triple }
    }

    /// Evaluate on cell `ci` at reference coordinates, with shape data
    /// supplied by the caller (values and reference gradients of the three
    /// bases at that point).
    pub fn eval_with_tables(
        &self,
        ci: usize,
        geom: &crate::spaces::CellGeometry,
        vel: &(Vec<f64>, Vec<[f64; 2]>),
        vor: &(Vec<f64>, Vec<[f64; 2]>),
        pre: &(Vec<f64>, Vec<[f64; 2]>),
    ) -> SampledState {
        let s = self.spaces;
        let vel_dofs = s.velocity_cell_dofs(ci);
        let ns = s.velocity_local_scalar();
        let mut u = [0.0; 2];
        let mut grad_u = [[0.0; 2]; 2];
        for i in 0..ns {
            let g = geom.grad_to_physical(vel.1[i]);
            for c in 0..2 {
                let coef = self.triple.velocity[vel_dofs[2 * i + c]];
                u[c] += coef * vel.0[i];
                grad_u[c][0] += coef * g[0];
                grad_u[c][1] += coef * g[1];
            }
        }
        let mut w = 0.0;
        let mut grad_w = [0.0; 2];
        for (m, &gdof) in s.vorticity.cell_dofs(ci).iter().enumerate() {
            let coef = self.triple.vorticity[gdof];
            let g = geom.grad_to_physical(vor.1[m]);
            w += coef * vor.0[m];
            grad_w[0] += coef * g[0];
            grad_w[1] += coef * g[1];
        }
        let mut p = 0.0;
        let mut grad_p = [0.0; 2];
        for (m, &gdof) in s.pressure.cell_dofs[ci].iter().enumerate() {
            let coef = self.triple.pressure[gdof];
            let g = geom.grad_to_physical(pre.1[m]);
            p += coef * pre.0[m];
            grad_p[0] += coef * g[0];
            grad_p[1] += coef * g[1];
        }
        SampledState { u, grad_u, w, grad_w, p, grad_p }
    }

    pub fn eval(&self, ci: usize, xref: [f64; 2]) -> SampledState {
        let s = self.spaces;
        let geom = s.geometry(ci);
        let vel = s.velocity_scalar_eval(xref[0], xref[1]);
        let vor = s.vorticity.basis().eval(xref[0], xref[1]);
        let pre = s.pressure.basis.eval(xref[0], xref[1]);
        self.eval_with_tables(ci, &geom, &vel, &vor, &pre)
    }
}

fn error_rule(spaces: &SpaceSet) -> QuadratureRule {
    quadrature_rule((spaces.quadrature.degree + 2).min(MAX_DEGREE)).unwrap()
}

/// Norms of the three error components.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub velocity: f64,
    pub vorticity: f64,
    pub pressure: f64,
}

impl ErrorReport {
    pub fn total(&self) -> f64 {
        (self.velocity * self.velocity
            + self.vorticity * self.vorticity
            + self.pressure * self.pressure)
            .sqrt()
    }
}

/// Exact errors of a discrete solution against the given exact fields.
pub fn compute_errors(
    spaces: &SpaceSet,
    triple: &SolutionTriple,
    exact_velocity: &VectorField,
    exact_vorticity: &ScalarField,
    exact_pressure: &ScalarField,
) -> ErrorReport {
    let rule = error_rule(spaces);
    let tables = RefTables::build(spaces, &rule);
    let sol = DiscreteSolution::new(spaces, triple);

    // per-cell accumulators: (u-part, w-part, int e_p, int e_p^2, area)
    let acc: Vec<[f64; 5]> = (0..spaces.mesh.num_cells())
        .into_par_iter()
        .map(|ci| {
            let geom = spaces.geometry(ci);
            let mut a = [0.0; 5];
            for q in 0..rule.len() {
                let w = rule.weights[q] * geom.det;
                let xq = geom.map(rule.xy(q));
                let st =
                    sol.eval_with_tables(ci, &geom, &tables.vel[q], &tables.vor[q], &tables.pre[q]);

                let ue = exact_velocity.eval(xq);
                let je = exact_velocity.jacobian(xq);
                let e = [st.u[0] - ue[0], st.u[1] - ue[1]];
                let rot_e = st.rot_u() - (je[1][0] - je[0][1]);
                let div_e = st.div_u() - (je[0][0] + je[1][1]);
                a[0] += w * (e[0] * e[0] + e[1] * e[1] + rot_e * rot_e + div_e * div_e);

                let we = st.w - exact_vorticity.eval(xq);
                a[1] += w * we * we;

                let pe = st.p - exact_pressure.eval(xq);
                a[2] += w * pe;
                a[3] += w * pe * pe;
                a[4] += w;
            }
            a
        })
        .collect();

    let mut sums = [0.0; 5];
    for a in &acc {
        for k in 0..5 {
            sums[k] += a[k];
        }
    }
    // mean-free pressure error: ||e - mean(e)||^2 = int e^2 - (int e)^2 / |O|
    let p_sq = (sums[3] - sums[2] * sums[2] / sums[4]).max(0.0);
    ErrorReport {
        velocity: sums[0].max(0.0).sqrt(),
        vorticity: sums[1].max(0.0).sqrt(),
        pressure: p_sq.sqrt(),
    }
}

/// Local and global values of the residual estimator.
#[derive(Debug, Clone)]
pub struct EstimatorField {
    /// Theta_T per cell.
    pub local: Vec<f64>,
    /// Theta = sqrt(sum Theta_T^2).
    pub total: f64,
}

/// Residual estimator: Theta_T^2 = h_T^2 || f - sigma u_h - nu curl w_h
/// - (beta.grad) u_h + 2 eps(u_h) grad nu - grad p_h ||^2
/// + || w_h - rot u_h ||^2 + || div u_h ||^2, all on T.
pub fn estimate(spaces: &SpaceSet, triple: &SolutionTriple, data: &ProblemData) -> EstimatorField {
    let rule = error_rule(spaces);
    let tables = RefTables::build(spaces, &rule);
    let sol = DiscreteSolution::new(spaces, triple);

    let local: Vec<f64> = (0..spaces.mesh.num_cells())
        .into_par_iter()
        .map(|ci| {
            let geom = spaces.geometry(ci);
            let h = spaces.mesh.cell_diameter(ci);
            let mut momentum = 0.0;
            let mut consistency = 0.0;
            let mut divergence = 0.0;
            for q in 0..rule.len() {
                let w = rule.weights[q] * geom.det;
                let xq = geom.map(rule.xy(q));
                let st =
                    sol.eval_with_tables(ci, &geom, &tables.vel[q], &tables.vor[q], &tables.pre[q]);

                let fv = data.f.eval(xq);
                let nu = data.nu.eval(xq);
                let gn = data.nu.grad(xq);
                let beta = data.beta.eval(xq);
                let curl_w = [st.grad_w[1], -st.grad_w[0]];
                let ju = st.grad_u;
                let eps_gn = [
                    ju[0][0] * gn[0] + 0.5 * (ju[0][1] + ju[1][0]) * gn[1],
                    0.5 * (ju[0][1] + ju[1][0]) * gn[0] + ju[1][1] * gn[1],
                ];
                let conv = [
                    ju[0][0] * beta[0] + ju[0][1] * beta[1],
                    ju[1][0] * beta[0] + ju[1][1] * beta[1],
                ];
                let r = [
                    fv[0] - data.sigma * st.u[0] - nu * curl_w[0] - conv[0] + 2.0 * eps_gn[0]
                        - st.grad_p[0],
                    fv[1] - data.sigma * st.u[1] - nu * curl_w[1] - conv[1] + 2.0 * eps_gn[1]
                        - st.grad_p[1],
                ];
                momentum += w * (r[0] * r[0] + r[1] * r[1]);
                let c = st.w - st.rot_u();
                consistency += w * c * c;
                let d = st.div_u();
                divergence += w * d * d;
            }
            (h * h * momentum + consistency + divergence).sqrt()
        })
        .collect();

    let total = local.iter().map(|t| t * t).sum::<f64>().sqrt();
    EstimatorField { local, total }
}

pub fn effectivity(errors: &ErrorReport, theta: f64) -> f64 {
    errors.total() / theta
}

/// r = log(e / e_prev) / log(h / h_prev) for mesh sizes h.
pub fn convergence_rate(e: f64, e_prev: f64, h: f64, h_prev: f64) -> f64 {
    (e / e_prev).ln() / (h / h_prev).ln()
}

/// Rate against unknown counts N for meshes without a uniform size:
/// r = -2 log(e / e_prev) / log(N / N_prev).
pub fn convergence_rate_dofs(e: f64, e_prev: f64, n: usize, n_prev: usize) -> f64 {
    -2.0 * (e / e_prev).ln() / (n as f64 / n_prev as f64).ln()
}

/// One line of a convergence study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub level: usize,
    /// Mesh size h for uniform studies, unknown count N for adaptive ones.
    pub h_or_n: f64,
    pub errors: ErrorReport,
    /// (r_u, r_w, r_p); None on the first row.
    pub rates: [Option<f64>; 3],
    pub theta: Option<f64>,
    pub effectivity: Option<f64>,
}

fn fmt_sig4(v: f64) -> String {
    format!("{v:.3e}")
}

fn fmt_rate(r: Option<f64>) -> String {
    match r {
        Some(v) => format!("{v:.2}"),
        None => String::new(),
    }
}

/// CSV with columns level,h_or_N,e_u,r_u,e_w,r_w,e_p,r_p,theta,eff;
/// errors carry four significant digits, rates two decimals.
pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("level,h_or_N,e_u,r_u,e_w,r_w,e_p,r_p,theta,eff\n");
    for row in rows {
        let h = if row.h_or_n.fract() == 0.0 && row.h_or_n.abs() < 1e15 {
            format!("{}", row.h_or_n as i64)
        } else {
            fmt_sig4(row.h_or_n)
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            row.level,
            h,
            fmt_sig4(row.errors.velocity),
            fmt_rate(row.rates[0]),
            fmt_sig4(row.errors.vorticity),
            fmt_rate(row.rates[1]),
            fmt_sig4(row.errors.pressure),
            fmt_rate(row.rates[2]),
            row.theta.map(fmt_sig4).unwrap_or_default(),
            row.effectivity.map(|e| format!("{e:.3}")).unwrap_or_default(),
        );
    }
    s
}

/// Fill the rate columns of a study in place from consecutive rows.
pub fn fill_rates(rows: &mut [StudyRow], dof_based: bool) {
    for i in 1..rows.len() {
        let (prev, cur) = (rows[i - 1].clone(), &mut rows[i]);
        let pairs = [
            (cur.errors.velocity, prev.errors.velocity),
            (cur.errors.vorticity, prev.errors.vorticity),
            (cur.errors.pressure, prev.errors.pressure),
        ];
        for (k, (e, ep)) in pairs.into_iter().enumerate() {
            cur.rates[k] = Some(if dof_based {
                convergence_rate_dofs(e, ep, cur.h_or_n as usize, prev.h_or_n as usize)
            } else {
                convergence_rate(e, ep, cur.h_or_n, prev.h_or_n)
            });
        }
    }
}
