//! Adaptive refinement loop: solve, estimate, mark, refine.
//!
//! Cells are marked by the maximum rule: T is refined when
//! Theta_T >= (1/2) max_T' Theta_T', ties included.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::assembly::{assemble, AssemblyError};
use crate::error_analysis::{compute_errors, effectivity, estimate, ErrorReport};
use crate::mesh::{MarkedSet, MeshError, Triangulation};
use crate::problem::ManufacturedCase;
use crate::solver::{solve, SolverError};
use crate::spaces::{build_space_set, ElementFamily, SpaceError};

#[derive(Debug, Error)]
pub enum AdaptivityError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("no cells marked: estimator is identically zero")]
    NothingToMark,
}

/// Maximum-rule marking at fraction 1/2; the largest contributor is always
/// marked and ties at the threshold are included.
pub fn mark_cells(local: &[f64]) -> Option<MarkedSet> {
    let max = local.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let threshold = 0.5 * max;
    let cells: Vec<usize> = local
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t >= threshold)
        .map(|(ci, _)| ci)
        .collect();
    Some(MarkedSet::new(cells))
}

/// Record of one adaptive step.
#[derive(Debug, Clone)]
pub struct AdaptiveStep {
    pub level: usize,
    pub num_cells: usize,
    /// Unknown count N of the discrete triple (excluding the multiplier).
    pub unknowns: usize,
    pub errors: ErrorReport,
    pub theta: f64,
    pub effectivity: f64,
    pub marked: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    pub max_steps: usize,
    /// Stop once Theta drops below this value.
    pub theta_tol: f64,
    /// When set, the mesh of every step is exported as VTK into this
    /// directory as `step_<k>.vtk` with the solution sampled at vertices.
    pub export_dir: Option<PathBuf>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { max_steps: 10, theta_tol: 0.0, export_dir: None }
    }
}

fn export_step(
    dir: &Path,
    level: usize,
    mesh: &Triangulation,
    spaces: &crate::spaces::SpaceSet,
    triple: &crate::solver::SolutionTriple,
) -> Result<(), MeshError> {
    // vertices come first in every continuous scalar numbering, so vertex
    // samples of the fields are direct coefficient reads
    let nv = mesh.num_vertices();
    let speed: Vec<f64> = (0..nv)
        .map(|v| triple.velocity[2 * v].hypot(triple.velocity[2 * v + 1]))
        .collect();
    let pressure: Vec<f64> = triple.pressure[..nv].to_vec();
    let vorticity: Option<Vec<f64>> =
        if let crate::spaces::VorticitySpace::Continuous(_) = spaces.vorticity {
            Some(triple.vorticity[..nv].to_vec())
        } else {
            None
        };
    let mut data: Vec<(&str, usize, &[f64])> =
        vec![("speed", 1, &speed), ("pressure", 1, &pressure)];
    if let Some(v) = &vorticity {
        data.push(("vorticity", 1, v));
    }
    std::fs::create_dir_all(dir).map_err(MeshError::Io)?;
    let s = mesh.vtk_string(&data);
    std::fs::write(dir.join(format!("step_{level}.vtk")), s).map_err(MeshError::Io)
}

/// Run the adaptive loop for a manufactured case, starting from the given
/// mesh. Always performs a final solve on the last refined mesh, so the
/// returned history has one record per visited mesh.
pub fn adaptive_loop(
    case: &ManufacturedCase,
    family: ElementFamily,
    initial_mesh: Triangulation,
    options: &AdaptiveOptions,
) -> Result<Vec<AdaptiveStep>, AdaptivityError> {
    let mut mesh = initial_mesh;
    let mut steps = Vec::new();
    for level in 0..options.max_steps {
        let spaces = build_space_set(&mesh, family)?;
        let system = assemble(&spaces, &case.data)?;
        let triple = solve(&system)?;
        let errors = compute_errors(
            &spaces,
            &triple,
            &case.exact_velocity,
            &case.exact_vorticity,
            &case.exact_pressure,
        );
        let est = estimate(&spaces, &triple, &case.data);
        if let Some(dir) = &options.export_dir {
            export_step(dir, level, &mesh, &spaces, &triple)?;
        }

        let stop = est.total <= options.theta_tol || level + 1 == options.max_steps;
        let marked = if stop {
            0
        } else {
            let marked = mark_cells(&est.local).ok_or(AdaptivityError::NothingToMark)?;
            let count = marked.cells.len();
            mesh = mesh.refine_adaptive(&marked)?;
            count
        };
        steps.push(AdaptiveStep {
            level,
            num_cells: spaces.mesh.num_cells(),
            unknowns: spaces.total_dim(),
            errors,
            theta: est.total,
            effectivity: effectivity(&errors, est.total),
            marked,
        });
        if stop {
            break;
        }
    }
    Ok(steps)
}
