//! Global assembly of the augmented velocity-vorticity-pressure system.
//!
//! Unknown ordering is (u, omega, p, lambda) with lambda a single Lagrange
//! multiplier enforcing the zero pressure mean. Homogeneous Dirichlet
//! velocity conditions are applied by symmetric elimination: constrained
//! rows and columns are dropped and replaced by an identity diagonal.

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::problem::ProblemData;
use crate::sparse::{CsrMatrix, Triplets};
use crate::spaces::{RefTables, SpaceSet};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("non-finite value assembled on cell {0}")]
    NonFinite(usize),
}

/// Assembled linear system with the block layout of the unknown vector.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub velocity_range: Range<usize>,
    pub vorticity_range: Range<usize>,
    pub pressure_range: Range<usize>,
    /// Velocity DOFs removed by the Dirichlet condition (global indices).
    pub constrained: Vec<bool>,
}

impl SparseSystem {
    pub fn multiplier_index(&self) -> usize {
        self.pressure_range.end
    }

    pub fn dim(&self) -> usize {
        self.pressure_range.end + 1
    }
}

struct CellContribution {
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

/// Local integration of one cell; indices returned are global.
fn assemble_cell(
    spaces: &SpaceSet,
    tables: &RefTables,
    data: &ProblemData,
    offsets: (usize, usize, usize),
    ci: usize,
) -> Result<CellContribution, AssemblyError> {
    let (off_w, off_p, off_l) = offsets;
    let geom = spaces.geometry(ci);
    let det = geom.det;
    let rule = &spaces.quadrature;

    let vel_dofs = spaces.velocity_cell_dofs(ci);
    let vor_dofs = spaces.vorticity.cell_dofs(ci);
    let pre_dofs = &spaces.pressure.cell_dofs[ci];
    let ns = spaces.velocity_local_scalar();
    let nvl = 2 * ns;
    let nw = vor_dofs.len();
    let np = pre_dofs.len();

    let mut a_uu = vec![0.0; nvl * nvl];
    let mut a_uw = vec![0.0; nvl * nw];
    let mut a_wu = vec![0.0; nw * nvl];
    let mut a_ww = vec![0.0; nw * nw];
    let mut b_up = vec![0.0; nvl * np];
    let mut f_u = vec![0.0; nvl];
    let mut int_q = vec![0.0; np];

    let (sigma, k1, k2) = (data.sigma, data.kappa1, data.kappa2);

    // physical gradients of the scalar velocity functions, reused per point
    let mut gphi = vec![[0.0f64; 2]; ns];

    for q in 0..rule.len() {
        let w = rule.weights[q] * det;
        let xq = geom.map(rule.xy(q));
        let nu = data.nu.eval(xq);
        let gn = data.nu.grad(xq);
        let beta = data.beta.eval(xq);
        let fv = data.f.eval(xq);

        let (phi, gref) = &tables.vel[q];
        for i in 0..ns {
            gphi[i] = geom.grad_to_physical(gref[i]);
        }
        let (psi, _) = &tables.vor[q];
        let (chi, _) = &tables.pre[q];

        // per local vector function (scalar i, component c):
        //   div v  = gphi[i][c]
        //   rot v  = c == 1 ? gphi[i][0] : -gphi[i][1]
        for i in 0..ns {
            let phi_i = phi[i];
            let gi = gphi[i];
            for c in 0..2 {
                let li = 2 * i + c;
                let div_i = gi[c];
                let rot_i = if c == 1 { gi[0] } else { -gi[1] };
                // grad nu x v = d1(nu) v2 - d2(nu) v1
                let cross_i = phi_i * if c == 1 { gn[0] } else { -gn[1] };

                f_u[li] += w * (fv[c] * phi_i);

                for j in 0..ns {
                    let phi_j = phi[j];
                    let gj = gphi[j];
                    let conv_j = beta[0] * gj[0] + beta[1] * gj[1];
                    let gn_dot_gj = gn[0] * gj[0] + gn[1] * gj[1];
                    for d in 0..2 {
                        let lj = 2 * j + d;
                        let div_j = gj[d];
                        let rot_j = if d == 1 { gj[0] } else { -gj[1] };
                        // (eps(u) grad nu)_c for u = phi_j e_d
                        let eps_gn =
                            0.5 * (gj[c] * gn[d] + if c == d { gn_dot_gj } else { 0.0 });
                        let mut val =
                            k1 * rot_j * rot_i + k2 * div_j * div_i - 2.0 * eps_gn * phi_i;
                        if c == d {
                            val += (sigma * phi_j + conv_j) * phi_i;
                        }
                        a_uu[li * nvl + lj] += w * val;
                    }
                }

                for m in 0..nw {
                    // + nu omega rot v - kappa1 omega rot v + omega (grad nu x v)
                    a_uw[li * nw + m] += w * psi[m] * ((nu - k1) * rot_i + cross_i);
                    // - nu theta rot u
                    a_wu[m * nvl + li] -= w * nu * psi[m] * rot_i;
                }

                for m in 0..np {
                    // B((v, .), p) = -int p div v
                    b_up[li * np + m] -= w * chi[m] * div_i;
                }
            }
        }

        for m in 0..nw {
            for l in 0..nw {
                a_ww[m * nw + l] += w * nu * psi[m] * psi[l];
            }
        }
        for m in 0..np {
            int_q[m] += w * chi[m];
        }
    }

    let cap = nvl * (nvl + 2 * nw + 2 * np) + nw * nw + 2 * np;
    let mut entries = Vec::with_capacity(cap);
    let mut rhs = Vec::with_capacity(nvl);
    let mut push = |r: usize, c: usize, v: f64| {
        if v != 0.0 {
            entries.push((r, c, v));
        }
    };
    for i in 0..nvl {
        let gi = vel_dofs[i];
        for j in 0..nvl {
            push(gi, vel_dofs[j], a_uu[i * nvl + j]);
        }
        for m in 0..nw {
            push(gi, off_w + vor_dofs[m], a_uw[i * nw + m]);
        }
        for m in 0..np {
            let v = b_up[i * np + m];
            push(gi, off_p + pre_dofs[m], v);
            // continuity rows: B((u, .), q)
            push(off_p + pre_dofs[m], gi, v);
        }
        rhs.push((gi, f_u[i]));
    }
    for m in 0..nw {
        let gm = off_w + vor_dofs[m];
        for i in 0..nvl {
            push(gm, vel_dofs[i], a_wu[m * nvl + i]);
        }
        for l in 0..nw {
            push(gm, off_w + vor_dofs[l], a_ww[m * nw + l]);
        }
    }
    for m in 0..np {
        let gm = off_p + pre_dofs[m];
        push(gm, off_l, int_q[m]);
        push(off_l, gm, int_q[m]);
    }

    if entries.iter().any(|&(_, _, v)| !v.is_finite())
        || rhs.iter().any(|&(_, v)| !v.is_finite())
    {
        return Err(AssemblyError::NonFinite(ci));
    }
    Ok(CellContribution { entries, rhs })
}

/// Assemble the full system for the given spaces and coefficients. The
/// element loop runs in parallel; contributions are merged in cell order so
/// repeated runs produce identical bits.
pub fn assemble(spaces: &SpaceSet, data: &ProblemData) -> Result<SparseSystem, AssemblyError> {
    let nu_dim = spaces.velocity_dim;
    let nw_dim = spaces.vorticity_dim();
    let np_dim = spaces.pressure_dim();
    let off_w = nu_dim;
    let off_p = nu_dim + nw_dim;
    let off_l = off_p + np_dim;
    let n = off_l + 1;

    let tables = RefTables::build(spaces, &spaces.quadrature);
    let cells: Vec<Result<CellContribution, AssemblyError>> = (0..spaces.mesh.num_cells())
        .into_par_iter()
        .map(|ci| assemble_cell(spaces, &tables, data, (off_w, off_p, off_l), ci))
        .collect();

    let mut constrained = vec![false; n];
    constrained[..nu_dim].copy_from_slice(&spaces.velocity_boundary);

    let mut triplets = Triplets::new(n, n);
    let mut rhs = vec![0.0; n];
    for cell in cells {
        let cell = cell?;
        for (r, c, v) in cell.entries {
            if !constrained[r] && !constrained[c] {
                triplets.push(r, c, v);
            }
        }
        for (r, v) in cell.rhs {
            if !constrained[r] {
                rhs[r] += v;
            }
        }
    }
    for (i, &fixed) in constrained.iter().enumerate() {
        if fixed {
            triplets.push(i, i, 1.0);
        }
    }

    Ok(SparseSystem {
        matrix: triplets.to_csr(),
        rhs,
        velocity_range: 0..nu_dim,
        vorticity_range: off_w..off_p,
        pressure_range: off_p..off_l,
        constrained,
    })
}
