//! Augmented mixed finite element solver for the 2D Oseen equations in
//! velocity-vorticity-pressure form with variable viscosity.
//!
//! The library covers the full pipeline: structured triangulations of the
//! unit square and the L-shaped domain with conforming uniform/adaptive
//! refinement, Taylor-Hood and MINI element families with continuous or
//! discontinuous vorticity, assembly of the augmented saddle-point system,
//! a deterministic sparse LU solve, exact-error convergence studies, the
//! residual a posteriori error estimator, and the adaptive refinement loop.

pub mod mesh;
pub mod quadrature;
pub mod basis;
pub mod spaces;
pub mod problem;
pub mod assembly;
pub mod sparse;
pub mod solver;
pub mod error_analysis;
pub mod adaptivity;
pub mod config;

pub use mesh::{build_lshape_mesh, build_unit_square_mesh, MarkedSet, Triangulation};
pub use spaces::{ElementFamily, SpaceSet, VorticityContinuity};
