//! Discrete spaces: vector Lagrange velocity (optionally bubble-enriched),
//! continuous or discontinuous scalar vorticity, and continuous zero-mean
//! pressure, with global DOF maps and the default quadrature rule.

use thiserror::Error;

use crate::basis::{bubble, LagrangeBasis, NodeKind};
use crate::mesh::Triangulation;
use crate::quadrature::{quadrature_rule, QuadratureRule, MAX_DEGREE};

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("polynomial order k must be >= 1, got {0}")]
    ZeroOrder(usize),
    #[error(transparent)]
    Quadrature(#[from] crate::quadrature::QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyVariant {
    /// Continuous vector P_{k+1} velocity with continuous P_k pressure.
    TaylorHood(usize),
    /// Vector P_k velocity enriched with one vector cell bubble, continuous
    /// P_k pressure.
    Mini(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VorticityContinuity {
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementFamily {
    pub variant: FamilyVariant,
    pub vorticity: VorticityContinuity,
}

impl ElementFamily {
    pub fn taylor_hood(k: usize, vorticity: VorticityContinuity) -> Self {
        Self { variant: FamilyVariant::TaylorHood(k), vorticity }
    }

    pub fn mini(k: usize, vorticity: VorticityContinuity) -> Self {
        Self { variant: FamilyVariant::Mini(k), vorticity }
    }

    pub fn order(&self) -> usize {
        match self.variant {
            FamilyVariant::TaylorHood(k) | FamilyVariant::Mini(k) => k,
        }
    }

    pub fn velocity_degree(&self) -> usize {
        match self.variant {
            FamilyVariant::TaylorHood(k) => k + 1,
            FamilyVariant::Mini(k) => k,
        }
    }

    pub fn has_bubbles(&self) -> bool {
        matches!(self.variant, FamilyVariant::Mini(_))
    }
}

/// Continuous scalar Lagrange space: global nodes are mesh vertices, then
/// `degree - 1` nodes per edge (walked from the lower-index vertex), then
/// per-cell interior nodes.
#[derive(Debug, Clone)]
pub struct ContinuousScalarSpace {
    pub basis: LagrangeBasis,
    pub dim: usize,
    /// cell_dofs[ci][local] = global scalar DOF index.
    pub cell_dofs: Vec<Vec<usize>>,
    pub dof_coords: Vec<[f64; 2]>,
    pub boundary_dof: Vec<bool>,
}

impl ContinuousScalarSpace {
    pub fn new(mesh: &Triangulation, degree: usize) -> Self {
        let basis = LagrangeBasis::new(degree);
        let per_edge = degree - 1;
        let per_cell = basis.num_interior();
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let nc = mesh.num_cells();
        let dim = nv + per_edge * ne + per_cell * nc;

        let mut dof_coords = vec![[0.0; 2]; dim];
        let mut boundary_dof = vec![false; dim];
        for v in 0..nv {
            dof_coords[v] = mesh.vertices[v];
            boundary_dof[v] = mesh.boundary_vertex[v];
        }
        for (ei, edge) in mesh.edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            for t in 1..degree {
                let s = t as f64 / degree as f64;
                let g = nv + ei * per_edge + (t - 1);
                dof_coords[g] = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                boundary_dof[g] = edge.is_boundary();
            }
        }

        let interior_offset = nv + per_edge * ne;
        let mut cell_dofs = Vec::with_capacity(nc);
        for ci in 0..nc {
            let cell = mesh.cells[ci];
            let mut dofs = Vec::with_capacity(basis.len());
            for kind in &basis.node_kinds {
                let g = match *kind {
                    NodeKind::Vertex(v) => cell[v],
                    NodeKind::Edge { edge, index } => {
                        // local edge 0: v0-v1, 1: v1-v2, 2: v2-v0
                        let (la, lb) = [(0, 1), (1, 2), (2, 0)][edge];
                        let (ga, gb) = (cell[la], cell[lb]);
                        // mesh edge index via the cell_edges table: the mesh
                        // stores the edge opposite local vertex i at slot i,
                        // so the edge (v_la, v_lb) is opposite the third vertex.
                        let opposite = 3 - la - lb;
                        let ei = mesh.cell_edges[ci][opposite];
                        // global edge nodes are walked from the lower vertex index
                        let fwd = ga < gb;
                        let pos = if fwd { index } else { degree - index };
                        nv + ei * per_edge + (pos - 1)
                    }
                    NodeKind::Interior(k) => interior_offset + ci * per_cell + k,
                };
                dofs.push(g);
            }
            for (local, kind) in basis.node_kinds.iter().enumerate() {
                if let NodeKind::Interior(_) = kind {
                    // interior node coordinates come from this cell's map
                    let [x, y] = basis.nodes[local];
                    let g = dofs[local];
                    let geom = CellGeometry::new(mesh, ci);
                    dof_coords[g] = geom.map([x, y]);
                }
            }
            cell_dofs.push(dofs);
        }

        Self { basis, dim, cell_dofs, dof_coords, boundary_dof }
    }
}

/// Cellwise (discontinuous) scalar Lagrange space.
#[derive(Debug, Clone)]
pub struct DiscontinuousScalarSpace {
    pub basis: LagrangeBasis,
    pub dim: usize,
    pub per_cell: usize,
}

impl DiscontinuousScalarSpace {
    pub fn new(mesh: &Triangulation, degree: usize) -> Self {
        let basis = LagrangeBasis::new(degree);
        let per_cell = basis.len();
        Self { dim: per_cell * mesh.num_cells(), basis, per_cell }
    }

    pub fn cell_dofs(&self, ci: usize) -> Vec<usize> {
        (ci * self.per_cell..(ci + 1) * self.per_cell).collect()
    }
}

#[derive(Debug, Clone)]
pub enum VorticitySpace {
    Continuous(ContinuousScalarSpace),
    Discontinuous(DiscontinuousScalarSpace),
}

impl VorticitySpace {
    pub fn dim(&self) -> usize {
        match self {
            VorticitySpace::Continuous(s) => s.dim,
            VorticitySpace::Discontinuous(s) => s.dim,
        }
    }

    pub fn basis(&self) -> &LagrangeBasis {
        match self {
            VorticitySpace::Continuous(s) => &s.basis,
            VorticitySpace::Discontinuous(s) => &s.basis,
        }
    }

    pub fn cell_dofs(&self, ci: usize) -> Vec<usize> {
        match self {
            VorticitySpace::Continuous(s) => s.cell_dofs[ci].clone(),
            VorticitySpace::Discontinuous(s) => s.cell_dofs(ci),
        }
    }
}

/// Affine reference-to-physical map of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: [f64; 2],
    /// Columns are the edge vectors v1-v0 and v2-v0.
    pub jac: [[f64; 2]; 2],
    pub jac_inv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(mesh: &Triangulation, ci: usize) -> Self {
        let [a, b, c] = mesh.cells[ci];
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let jac = [[pb[0] - pa[0], pc[0] - pa[0]], [pb[1] - pa[1], pc[1] - pa[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // J^{-1} = [[d, -b], [-c, a]] / det; its transpose swaps the
        // off-diagonal entries
        let jac_inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Self { origin: pa, jac, jac_inv_t, det }
    }

    pub fn map(&self, xref: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xref[0] + self.jac[0][1] * xref[1],
            self.origin[1] + self.jac[1][0] * xref[0] + self.jac[1][1] * xref[1],
        ]
    }

    pub fn grad_to_physical(&self, gref: [f64; 2]) -> [f64; 2] {
        [
            self.jac_inv_t[0][0] * gref[0] + self.jac_inv_t[0][1] * gref[1],
            self.jac_inv_t[1][0] * gref[0] + self.jac_inv_t[1][1] * gref[1],
        ]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

/// The discrete spaces V_h x W_h x Q_h on one mesh.
#[derive(Debug, Clone)]
pub struct SpaceSet {
    pub mesh: Triangulation,
    pub family: ElementFamily,
    pub velocity_scalar: ContinuousScalarSpace,
    pub vorticity: VorticitySpace,
    pub pressure: ContinuousScalarSpace,
    pub quadrature: QuadratureRule,
    /// Vector velocity dimension (2 per scalar node, plus 2 per cell for MINI).
    pub velocity_dim: usize,
    pub bubble_offset: usize,
    /// Per velocity DOF: constrained by the homogeneous Dirichlet condition.
    pub velocity_boundary: Vec<bool>,
}

pub fn build_space_set(mesh: &Triangulation, family: ElementFamily) -> Result<SpaceSet, SpaceError> {
    build_space_set_with_degree(mesh, family, None)
}

pub fn build_space_set_with_degree(
    mesh: &Triangulation,
    family: ElementFamily,
    quadrature_degree: Option<usize>,
) -> Result<SpaceSet, SpaceError> {
    let k = family.order();
    if k == 0 {
        return Err(SpaceError::ZeroOrder(0));
    }
    let velocity_scalar = ContinuousScalarSpace::new(mesh, family.velocity_degree());
    let pressure = ContinuousScalarSpace::new(mesh, k);
    let vorticity = match family.vorticity {
        VorticityContinuity::Continuous => {
            VorticitySpace::Continuous(ContinuousScalarSpace::new(mesh, k))
        }
        VorticityContinuity::Discontinuous => {
            VorticitySpace::Discontinuous(DiscontinuousScalarSpace::new(mesh, k))
        }
    };
    let bubble_offset = 2 * velocity_scalar.dim;
    let velocity_dim = if family.has_bubbles() {
        bubble_offset + 2 * mesh.num_cells()
    } else {
        bubble_offset
    };
    let mut velocity_boundary = vec![false; velocity_dim];
    for (i, &b) in velocity_scalar.boundary_dof.iter().enumerate() {
        if b {
            velocity_boundary[2 * i] = true;
            velocity_boundary[2 * i + 1] = true;
        }
    }
    // bubbles vanish on cell boundaries, hence never constrained

    let degree = quadrature_degree.unwrap_or_else(|| (2 * (k + 1) + 4).min(MAX_DEGREE));
    let quadrature = quadrature_rule(degree)?;

    Ok(SpaceSet {
        mesh: mesh.clone(),
        family,
        velocity_scalar,
        vorticity,
        pressure,
        quadrature,
        velocity_dim,
        bubble_offset,
        velocity_boundary,
    })
}

impl SpaceSet {
    pub fn vorticity_dim(&self) -> usize {
        self.vorticity.dim()
    }

    pub fn pressure_dim(&self) -> usize {
        self.pressure.dim
    }

    /// Total DOF count N of the triple (velocity, vorticity, pressure).
    pub fn total_dim(&self) -> usize {
        self.velocity_dim + self.vorticity_dim() + self.pressure_dim()
    }

    /// Number of scalar velocity shape functions per cell (nodal + bubble).
    pub fn velocity_local_scalar(&self) -> usize {
        self.velocity_scalar.basis.len() + usize::from(self.family.has_bubbles())
    }

    /// Global vector velocity DOFs of a cell, two per local scalar function,
    /// component-major within each node: [2i + comp].
    pub fn velocity_cell_dofs(&self, ci: usize) -> Vec<usize> {
        let nodal = &self.velocity_scalar.cell_dofs[ci];
        let mut dofs = Vec::with_capacity(2 * self.velocity_local_scalar());
        for &g in nodal {
            dofs.push(2 * g);
            dofs.push(2 * g + 1);
        }
        if self.family.has_bubbles() {
            dofs.push(self.bubble_offset + 2 * ci);
            dofs.push(self.bubble_offset + 2 * ci + 1);
        }
        dofs
    }

    pub fn geometry(&self, ci: usize) -> CellGeometry {
        CellGeometry::new(&self.mesh, ci)
    }

    /// Scalar velocity shape values and reference gradients (nodal + bubble)
    /// at a reference point.
    pub fn velocity_scalar_eval(&self, x: f64, y: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (mut values, mut grads) = self.velocity_scalar.basis.eval(x, y);
        if self.family.has_bubbles() {
            let (bv, bg) = bubble(x, y);
            values.push(bv);
            grads.push(bg);
        }
        (values, grads)
    }
}

/// Reference-basis tables evaluated once at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct RefTables {
    /// Per quadrature point: scalar velocity values and reference gradients
    /// (nodal functions, then the bubble for MINI).
    pub vel: Vec<(Vec<f64>, Vec<[f64; 2]>)>,
    pub vor: Vec<(Vec<f64>, Vec<[f64; 2]>)>,
    pub pre: Vec<(Vec<f64>, Vec<[f64; 2]>)>,
}

impl RefTables {
    pub fn build(spaces: &SpaceSet, rule: &QuadratureRule) -> Self {
        let mut vel = Vec::with_capacity(rule.len());
        let mut vor = Vec::with_capacity(rule.len());
        let mut pre = Vec::with_capacity(rule.len());
        for q in 0..rule.len() {
            let [x, y] = rule.xy(q);
            vel.push(spaces.velocity_scalar_eval(x, y));
            vor.push(spaces.vorticity.basis().eval(x, y));
            pre.push(spaces.pressure.basis.eval(x, y));
        }
        Self { vel, vor, pre }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_square_mesh, Triangulation};

    fn single_cell() -> Triangulation {
        Triangulation::from_cells(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[1, 2, 0]],
            0,
        )
        .unwrap()
    }

    #[test]
    fn taylor_hood_dims_unit_square_n2() {
        let mesh = build_unit_square_mesh(2);
        let fam = ElementFamily::taylor_hood(1, VorticityContinuity::Continuous);
        let s = build_space_set(&mesh, fam).unwrap();
        assert_eq!(s.velocity_dim, 2 * (9 + 16));
        assert_eq!(s.pressure_dim(), 9);
        assert_eq!(s.vorticity_dim(), 9);
        let fam2 = ElementFamily::taylor_hood(1, VorticityContinuity::Discontinuous);
        let s2 = build_space_set(&mesh, fam2).unwrap();
        assert_eq!(s2.vorticity_dim(), 24);
    }

    #[test]
    fn taylor_hood_single_cell_dims() {
        let mesh = single_cell();
        let s = build_space_set(&mesh, ElementFamily::taylor_hood(1, VorticityContinuity::Continuous))
            .unwrap();
        assert_eq!(s.velocity_dim, 12);
    }

    #[test]
    fn mini_single_cell_dims() {
        let mesh = single_cell();
        let s =
            build_space_set(&mesh, ElementFamily::mini(1, VorticityContinuity::Continuous)).unwrap();
        assert_eq!(s.velocity_dim, 2 * 3 + 2);
    }

    #[test]
    fn rejects_k_zero() {
        let mesh = single_cell();
        assert!(build_space_set(
            &mesh,
            ElementFamily { variant: FamilyVariant::TaylorHood(0), vorticity: VorticityContinuity::Continuous }
        )
        .is_err());
    }

    #[test]
    fn dof_map_bijective_and_shared_edges_agree() {
        let mesh = build_unit_square_mesh(3);
        for degree in [1usize, 2, 3] {
            let space = ContinuousScalarSpace::new(&mesh, degree);
            let mut hit = vec![false; space.dim];
            for dofs in &space.cell_dofs {
                for &g in dofs {
                    hit[g] = true;
                }
            }
            assert!(hit.iter().all(|&h| h), "degree {degree}: unhit global DOF");
            // shared DOFs must sit at identical coordinates from either cell
            for ci in 0..mesh.num_cells() {
                let geom = CellGeometry::new(&mesh, ci);
                for (local, &g) in space.cell_dofs[ci].iter().enumerate() {
                    let p = geom.map(space.basis.nodes[local]);
                    let q = space.dof_coords[g];
                    assert!(
                        (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12,
                        "degree {degree} cell {ci} local {local}: {p:?} vs {q:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_dofs_are_exactly_nodes_on_boundary() {
        let mesh = build_unit_square_mesh(3);
        let fam = ElementFamily::taylor_hood(1, VorticityContinuity::Continuous);
        let s = build_space_set(&mesh, fam).unwrap();
        for (i, coord) in s.velocity_scalar.dof_coords.iter().enumerate() {
            let on_boundary = coord[0].abs() <= 1e-12
                || coord[1].abs() <= 1e-12
                || (coord[0] - 1.0).abs() <= 1e-12
                || (coord[1] - 1.0).abs() <= 1e-12;
            assert_eq!(
                s.velocity_boundary[2 * i], on_boundary,
                "dof {i} at {coord:?}"
            );
            assert_eq!(s.velocity_boundary[2 * i + 1], on_boundary);
        }
    }

    #[test]
    fn default_quadrature_degree() {
        let mesh = single_cell();
        let s = build_space_set(&mesh, ElementFamily::taylor_hood(1, VorticityContinuity::Continuous))
            .unwrap();
        assert_eq!(s.quadrature.degree, 8);
    }
}
