//! Conforming 2D triangulations of the unit square and the L-shaped domain,
//! with uniform (red) refinement and adaptive newest-vertex bisection.
//!
//! Cells are stored counterclockwise with the convention that the refinement
//! edge of a triangle `[v0, v1, v2]` is the edge `(v1, v2)` opposite the
//! newest vertex `v0`. Initial meshes put the longest edge there, so newest
//! vertex bisection of the structured right-isosceles triangles reproduces
//! similar triangles and the minimum angle never degrades.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cell {0} has non-positive signed area {1}")]
    NonPositiveArea(usize, f64),
    #[error("edge ({0}, {1}) is incident to more than two cells")]
    NonManifoldEdge(usize, usize),
    #[error("cell {cell} refers to vertex {vertex} out of bounds ({nv} vertices)")]
    VertexOutOfBounds { cell: usize, vertex: usize, nv: usize },
    #[error("marked cell index {0} out of bounds ({1} cells)")]
    MarkOutOfBounds(usize, usize),
    #[error("marked set is empty")]
    EmptyMarkedSet,
    #[error("Euler formula violated: V={v} E={e} C={c}")]
    EulerViolated { v: usize, e: usize, c: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed mesh file: {0}")]
    Parse(String),
}

/// An undirected edge with its incident cells. `cells[1] == usize::MAX`
/// marks a boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: [usize; 2],
}

pub const NO_CELL: usize = usize::MAX;

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells[1] == NO_CELL
    }
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<Point>,
    /// Vertex-index triples in counterclockwise order; refinement edge is (v1, v2).
    pub cells: Vec<[usize; 3]>,
    /// Derived edge list, each edge stored with `vertices[0] < vertices[1]`,
    /// ordered lexicographically by vertex pair.
    pub edges: Vec<Edge>,
    /// Local edge i of a cell is the edge opposite local vertex i.
    pub cell_edges: Vec<[usize; 3]>,
    /// Indices into `edges` of the boundary edges (tag Γ).
    pub boundary_edges: Vec<usize>,
    pub boundary_vertex: Vec<bool>,
    pub generation: u32,
}

/// Cell indices selected for refinement.
#[derive(Debug, Clone, Default)]
pub struct MarkedSet {
    pub cells: Vec<usize>,
}

impl MarkedSet {
    pub fn new(cells: Vec<usize>) -> Self {
        Self { cells }
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Rotate a CCW triple so that its longest edge sits in the (v1, v2) slot.
fn rotate_longest(tri: [usize; 3], vertices: &[Point]) -> [usize; 3] {
    let lens = [
        dist(vertices[tri[1]], vertices[tri[2]]),
        dist(vertices[tri[2]], vertices[tri[0]]),
        dist(vertices[tri[0]], vertices[tri[1]]),
    ];
    let mut peak = 0;
    for i in 1..3 {
        if lens[i] > lens[peak] {
            peak = i;
        }
    }
    [tri[peak], tri[(peak + 1) % 3], tri[(peak + 2) % 3]]
}

impl Triangulation {
    /// Builds the derived edge data and validates all mesh invariants.
    pub fn from_cells(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        generation: u32,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (ci, cell) in cells.iter().enumerate() {
            for &v in cell {
                if v >= nv {
                    return Err(MeshError::VertexOutOfBounds { cell: ci, vertex: v, nv });
                }
            }
            let area = signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            if area <= 0.0 {
                return Err(MeshError::NonPositiveArea(ci, area));
            }
        }

        let mut edge_map: BTreeMap<(usize, usize), [usize; 2]> = BTreeMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            for k in 0..3 {
                let key = sorted_pair(cell[(k + 1) % 3], cell[(k + 2) % 3]);
                let entry = edge_map.entry(key).or_insert([NO_CELL, NO_CELL]);
                if entry[0] == NO_CELL {
                    entry[0] = ci;
                } else if entry[1] == NO_CELL {
                    entry[1] = ci;
                } else {
                    return Err(MeshError::NonManifoldEdge(key.0, key.1));
                }
            }
        }

        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (key, inc) in &edge_map {
            edge_index.insert(*key, edges.len());
            edges.push(Edge { vertices: [key.0, key.1], cells: *inc });
        }

        let mut cell_edges = vec![[0usize; 3]; cells.len()];
        for (ci, cell) in cells.iter().enumerate() {
            for k in 0..3 {
                let key = sorted_pair(cell[(k + 1) % 3], cell[(k + 2) % 3]);
                cell_edges[ci][k] = edge_index[&key];
            }
        }

        let boundary_edges: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| i)
            .collect();

        let mut boundary_vertex = vec![false; nv];
        for &ei in &boundary_edges {
            for &v in &edges[ei].vertices {
                boundary_vertex[v] = true;
            }
        }

        // V - E + (C + 1) = 2 for a connected mesh with one boundary loop.
        let (v, e, c) = (nv, edges.len(), cells.len());
        if v + c + 1 != e + 2 {
            return Err(MeshError::EulerViolated { v, e, c });
        }

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_edges,
            boundary_vertex,
            generation,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_area(&self, ci: usize) -> f64 {
        let [a, b, c] = self.cells[ci];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Cell diameter: the longest edge of the triangle.
    pub fn cell_diameter(&self, ci: usize) -> f64 {
        let [a, b, c] = self.cells[ci];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        dist(pa, pb).max(dist(pb, pc)).max(dist(pc, pa))
    }

    /// h := max cell diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_diameter(c))
            .fold(0.0, f64::max)
    }

    pub fn cell_min_angle(&self, ci: usize) -> f64 {
        let [a, b, c] = self.cells[ci];
        let p = [self.vertices[a], self.vertices[b], self.vertices[c]];
        let mut min = f64::MAX;
        for k in 0..3 {
            let o = p[k];
            let u = [p[(k + 1) % 3][0] - o[0], p[(k + 1) % 3][1] - o[1]];
            let v = [p[(k + 2) % 3][0] - o[0], p[(k + 2) % 3][1] - o[1]];
            let dot = u[0] * v[0] + u[1] * v[1];
            let cross = u[0] * v[1] - u[1] * v[0];
            min = min.min(cross.atan2(dot).abs());
        }
        min
    }

    pub fn min_angle(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_min_angle(c))
            .fold(f64::MAX, f64::min)
    }

    /// Interior-edge incidence is exactly 2 and boundary incidence exactly 1
    /// by construction; this re-derives the incidence from scratch as an
    /// independent check.
    pub fn check_conformity(&self) -> Result<(), MeshError> {
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for cell in &self.cells {
            for k in 0..3 {
                *count
                    .entry(sorted_pair(cell[(k + 1) % 3], cell[(k + 2) % 3]))
                    .or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &count {
            if n > 2 {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
        }
        Ok(())
    }

    /// Uniform red refinement: every cell is split into 4 similar children
    /// via edge midpoints; h halves exactly.
    pub fn refine_uniform(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![0usize; self.edges.len()];
        for (ei, edge) in self.edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            midpoint[ei] = vertices.len();
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        let mut cells = Vec::with_capacity(4 * self.num_cells());
        for (ci, cell) in self.cells.iter().enumerate() {
            let [v0, v1, v2] = *cell;
            let m0 = midpoint[self.cell_edges[ci][0]];
            let m1 = midpoint[self.cell_edges[ci][1]];
            let m2 = midpoint[self.cell_edges[ci][2]];
            for child in [[v0, m2, m1], [v1, m0, m2], [v2, m1, m0], [m0, m1, m2]] {
                cells.push(rotate_longest(child, &vertices));
            }
        }
        Self::from_cells(vertices, cells, self.generation + 1)
            .expect("red refinement preserves mesh invariants")
    }

    /// Newest-vertex bisection of the marked cells with recursive conformity
    /// closure. Every marked cell is split into 4 children (both of its
    /// bisection children are bisected again); closure neighbours are split
    /// into 2 or 4 as needed so no hanging nodes remain.
    pub fn refine_adaptive(&self, marked: &MarkedSet) -> Result<Self, MeshError> {
        if marked.cells.is_empty() {
            return Err(MeshError::EmptyMarkedSet);
        }
        for &ci in &marked.cells {
            if ci >= self.num_cells() {
                return Err(MeshError::MarkOutOfBounds(ci, self.num_cells()));
            }
        }

        // Edges that must be split: all three edges of each marked cell,
        // then the closure rule (a cell with any split edge must split its
        // refinement edge) until a fixed point.
        let mut split: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &ci in &marked.cells {
            let cell = self.cells[ci];
            for k in 0..3 {
                split.insert(sorted_pair(cell[(k + 1) % 3], cell[(k + 2) % 3]));
            }
        }
        loop {
            let mut changed = false;
            for cell in &self.cells {
                let refedge = sorted_pair(cell[1], cell[2]);
                if !split.contains(&refedge) {
                    let e1 = sorted_pair(cell[2], cell[0]);
                    let e2 = sorted_pair(cell[0], cell[1]);
                    if split.contains(&e1) || split.contains(&e2) {
                        split.insert(refedge);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(a, b) in &split {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            midpoint.insert((a, b), vertices.len());
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }

        fn emit(
            tri: [usize; 3],
            midpoint: &BTreeMap<(usize, usize), usize>,
            out: &mut Vec<[usize; 3]>,
        ) {
            let [a, b, c] = tri;
            match midpoint.get(&sorted_pair(b, c)) {
                Some(&m) => {
                    // Children keep CCW orientation; the new vertex is the peak.
                    emit([m, a, b], midpoint, out);
                    emit([m, c, a], midpoint, out);
                }
                None => out.push(tri),
            }
        }

        let mut cells = Vec::with_capacity(self.num_cells() * 2);
        for cell in &self.cells {
            emit(*cell, &midpoint, &mut cells);
        }
        Self::from_cells(vertices, cells, self.generation + 1)
    }

    /// ASCII legacy VTK unstructured grid (points + triangle cells).
    pub fn write_vtk(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.vtk_string(&[]))?;
        Ok(())
    }

    /// VTK file body; `point_data` is a list of (name, components, values)
    /// with `values.len() == components * num_vertices`.
    pub fn vtk_string(&self, point_data: &[(&str, usize, &[f64])]) -> String {
        let mut s = String::new();
        s.push_str("# vtk DataFile Version 3.0\n");
        s.push_str("oseen mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", self.num_vertices());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.17} {:.17} 0.0", p[0], p[1]);
        }
        let _ = writeln!(s, "CELLS {} {}", self.num_cells(), 4 * self.num_cells());
        for c in &self.cells {
            let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.num_cells());
        for _ in &self.cells {
            s.push_str("5\n");
        }
        if !point_data.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", self.num_vertices());
            for (name, comps, values) in point_data {
                assert_eq!(values.len(), comps * self.num_vertices());
                if *comps == 1 {
                    let _ = writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", name);
                    for v in *values {
                        let _ = writeln!(s, "{:.17}", v);
                    }
                } else {
                    let _ = writeln!(s, "VECTORS {} double", name);
                    for i in 0..self.num_vertices() {
                        let _ = writeln!(s, "{:.17} {:.17} 0.0", values[2 * i], values[2 * i + 1]);
                    }
                }
            }
        }
        s
    }

    /// Line-oriented plain-text format: vertex count, one coordinate pair per
    /// line, cell count, one index triple per line.
    pub fn write_text(&self, path: &Path) -> Result<(), MeshError> {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.num_vertices());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.17} {:.17}", p[0], p[1]);
        }
        let _ = writeln!(s, "{}", self.num_cells());
        for c in &self.cells {
            let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn read_text(path: &Path) -> Result<Self, MeshError> {
        let body = std::fs::read_to_string(path)?;
        let mut tokens = body.split_whitespace();
        let mut next = |what: &str| -> Result<String, MeshError> {
            tokens
                .next()
                .map(str::to_owned)
                .ok_or_else(|| MeshError::Parse(format!("unexpected end of file, expected {what}")))
        };
        let nv: usize = next("vertex count")?
            .parse()
            .map_err(|e| MeshError::Parse(format!("vertex count: {e}")))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x: f64 = next("x")?.parse().map_err(|e| MeshError::Parse(format!("{e}")))?;
            let y: f64 = next("y")?.parse().map_err(|e| MeshError::Parse(format!("{e}")))?;
            vertices.push([x, y]);
        }
        let nc: usize = next("cell count")?
            .parse()
            .map_err(|e| MeshError::Parse(format!("cell count: {e}")))?;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let mut tri = [0usize; 3];
            for t in &mut tri {
                *t = next("cell index")?
                    .parse()
                    .map_err(|e| MeshError::Parse(format!("{e}")))?;
            }
            cells.push(tri);
        }
        Self::from_cells(vertices, cells, 0)
    }
}

/// Uniform n x n grid of squares on (0,1)^2, each split into 2 triangles
/// along the bottom-left to top-right diagonal; h = sqrt(2)/n.
pub fn build_unit_square_mesh(n: usize) -> Triangulation {
    assert!(n >= 1, "n must be positive");
    let nf = n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            // Hypotenuse a-c is the refinement edge of both triangles.
            cells.push([b, c, a]);
            cells.push([d, a, c]);
        }
    }
    Triangulation::from_cells(vertices, cells, 0).expect("structured mesh is valid")
}

/// Conforming triangulation of the L-shaped domain (-1,1)^2 \ (0,1)^2 with
/// n subdivisions per unit length; the reentrant corner vertex is (0,0).
pub fn build_lshape_mesh(n: usize) -> Triangulation {
    assert!(n >= 1, "n must be positive");
    let nf = n as f64;
    let ni = n as i64;
    let in_domain_vertex = |i: i64, j: i64| !(i > 0 && j > 0);
    let mut vmap: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    for j in -ni..=ni {
        for i in -ni..=ni {
            if in_domain_vertex(i, j) {
                vmap.insert((i, j), vertices.len());
                vertices.push([i as f64 / nf, j as f64 / nf]);
            }
        }
    }
    let mut cells = Vec::new();
    for j in -ni..ni {
        for i in -ni..ni {
            if i >= 0 && j >= 0 {
                continue; // removed quadrant
            }
            let a = vmap[&(i, j)];
            let b = vmap[&(i + 1, j)];
            let c = vmap[&(i + 1, j + 1)];
            let d = vmap[&(i, j + 1)];
            cells.push([b, c, a]);
            cells.push([d, a, c]);
        }
    }
    Triangulation::from_cells(vertices, cells, 0).expect("structured L-shape mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_n1_counts() {
        let m = build_unit_square_mesh(1);
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_cells(), 2);
        assert_eq!(m.num_edges(), 5);
        // Euler: 4 - 5 + 3 = 2
        assert_eq!(m.num_vertices() + m.num_cells() + 1 - m.num_edges(), 2);
    }

    #[test]
    fn unit_square_n2_mesh_size() {
        let m = build_unit_square_mesh(2);
        assert_relative_eq!(m.mesh_size(), 0.70710678, max_relative = 1e-8);
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.num_vertices(), 9);
    }

    #[test]
    fn unit_square_n4_counts_euler() {
        let m = build_unit_square_mesh(4);
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_cells(), 32);
        // E = V + C - 1 by the Euler-formula oracle
        assert_eq!(m.num_edges(), 25 + 32 - 1);
        assert_eq!(m.num_edges(), 56);
    }

    #[test]
    fn lshape_counts_and_area() {
        let m = build_lshape_mesh(1);
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_cells(), 6);
        let m2 = build_lshape_mesh(2);
        assert_eq!(m2.num_cells(), 24);
        for n in [1, 2, 3, 5] {
            let m = build_lshape_mesh(n);
            assert_relative_eq!(m.total_area(), 3.0, epsilon = 1e-12);
            m.check_conformity().unwrap();
        }
        // reentrant corner vertex present exactly once
        let m3 = build_lshape_mesh(3);
        let corners = m3
            .vertices
            .iter()
            .filter(|p| p[0] == 0.0 && p[1] == 0.0)
            .count();
        assert_eq!(corners, 1);
    }

    #[test]
    fn uniform_refinement_counts_and_h() {
        let m = build_unit_square_mesh(2);
        let r = m.refine_uniform();
        assert_eq!(r.num_cells(), 32);
        assert_relative_eq!(r.mesh_size(), 0.3536, max_relative = 1e-3);
        // bit-exact halving on the dyadic grid
        assert_eq!(r.mesh_size(), 0.5 * m.mesh_size());
        assert_eq!(r.generation, 1);
        r.check_conformity().unwrap();
    }

    #[test]
    fn uniform_refinement_preserves_area_and_angles() {
        let one = Triangulation::from_cells(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[1, 2, 0]],
            0,
        )
        .unwrap();
        assert_relative_eq!(one.mesh_size(), std::f64::consts::SQRT_2, epsilon = 1e-15);
        let r = one.refine_uniform();
        assert_eq!(r.num_cells(), 4);
        assert!((r.total_area() - one.total_area()).abs() < 1e-14);

        let m = build_unit_square_mesh(1);
        let rr = m.refine_uniform().refine_uniform();
        assert_relative_eq!(rr.min_angle(), m.min_angle(), epsilon = 1e-12);
    }

    #[test]
    fn adaptive_mark_all_quadruples() {
        let m = build_unit_square_mesh(2);
        let marked = MarkedSet::new((0..m.num_cells()).collect());
        let r = m.refine_adaptive(&marked).unwrap();
        assert!(r.num_cells() >= 4 * m.num_cells());
        r.check_conformity().unwrap();
        assert_relative_eq!(r.total_area(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_single_cell_conforming() {
        let m = build_unit_square_mesh(2);
        // pick a cell having all vertices off the boundary corner; any cell works
        let r = m.refine_adaptive(&MarkedSet::new(vec![3])).unwrap();
        r.check_conformity().unwrap();
        assert_relative_eq!(r.total_area(), 1.0, epsilon = 1e-12);
        assert!(r.num_cells() > m.num_cells());
    }

    #[test]
    fn adaptive_rejects_bad_marks() {
        let m = build_unit_square_mesh(2);
        assert!(m.refine_adaptive(&MarkedSet::new(vec![])).is_err());
        assert!(m.refine_adaptive(&MarkedSet::new(vec![99])).is_err());
    }

    #[test]
    fn adaptive_corner_refinement_keeps_angles() {
        let mut m = build_lshape_mesh(1);
        let a0 = m.min_angle();
        for _ in 0..10 {
            // mark all cells touching the reentrant corner (0,0)
            let marked: Vec<usize> = (0..m.num_cells())
                .filter(|&c| {
                    m.cells[c]
                        .iter()
                        .any(|&v| m.vertices[v][0].abs() < 1e-12 && m.vertices[v][1].abs() < 1e-12)
                })
                .collect();
            m = m.refine_adaptive(&MarkedSet::new(marked)).unwrap();
            m.check_conformity().unwrap();
        }
        assert!(m.min_angle() >= 0.5 * a0);
        assert_relative_eq!(m.total_area(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn text_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.txt");
        let m = build_lshape_mesh(2);
        m.write_text(&path).unwrap();
        let m2 = Triangulation::read_text(&path).unwrap();
        assert_eq!(m.cells, m2.cells);
        assert_eq!(m.vertices, m2.vertices);
    }

    #[test]
    fn vtk_export_structure() {
        let m = build_unit_square_mesh(1);
        let s = m.vtk_string(&[]);
        assert!(s.contains("DATASET UNSTRUCTURED_GRID"));
        assert!(s.contains("POINTS 4 double"));
        assert!(s.contains("CELL_TYPES 2"));
    }

    #[test]
    fn refinement_halves_mesh_size_generations() {
        let mut m = build_unit_square_mesh(2);
        for _ in 0..3 {
            let r = m.refine_uniform();
            assert_eq!(r.mesh_size(), 0.5 * m.mesh_size());
            assert_relative_eq!(r.total_area(), 1.0, epsilon = 1e-12);
            m = r;
        }
    }
}
