//! Lagrange shape functions of arbitrary degree on the reference triangle,
//! plus the cubic cell bubble used by the MINI element.
//!
//! Nodal bases are built once per degree by inverting the Vandermonde matrix
//! of the monomial basis at the lattice nodes; evaluation then reduces to
//! monomial sums.

/// Where a local Lagrange node lives; spaces use this to build global DOF maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Local vertex 0, 1 or 2.
    Vertex(usize),
    /// On local edge `edge` (0: v0-v1, 1: v1-v2, 2: v2-v0), at 1-based
    /// position `index` of the `degree - 1` interior edge nodes, counted
    /// from the first endpoint.
    Edge { edge: usize, index: usize },
    /// Strictly inside the cell, `index` running over the interior lattice.
    Interior(usize),
}

/// Nodal Lagrange basis of given degree on the reference triangle with
/// vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub degree: usize,
    /// Reference coordinates of the nodes, ordered vertices, then edge nodes
    /// (edge by edge, walked from first to second endpoint), then interior.
    pub nodes: Vec<[f64; 2]>,
    pub node_kinds: Vec<NodeKind>,
    /// coeffs[i][m]: coefficient of monomial m in basis function i.
    coeffs: Vec<Vec<f64>>,
    monomials: Vec<(u32, u32)>,
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn lattice_nodes(degree: usize) -> (Vec<[f64; 2]>, Vec<NodeKind>) {
    let m = degree;
    let mf = m as f64;
    let mut nodes = Vec::new();
    let mut kinds = Vec::new();
    for v in 0..3 {
        nodes.push(REF_VERTICES[v]);
        kinds.push(NodeKind::Vertex(v));
    }
    if m >= 2 {
        for (edge, (a, b)) in [(0usize, 1usize), (1, 2), (2, 0)].iter().enumerate() {
            let (pa, pb) = (REF_VERTICES[*a], REF_VERTICES[*b]);
            for t in 1..m {
                let s = t as f64 / mf;
                nodes.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
                kinds.push(NodeKind::Edge { edge, index: t });
            }
        }
    }
    let mut interior = 0;
    for j in 1..m {
        for i in 1..m {
            if i + j <= m - 1 {
                nodes.push([i as f64 / mf, j as f64 / mf]);
                kinds.push(NodeKind::Interior(interior));
                interior += 1;
            }
        }
    }
    (nodes, kinds)
}

/// Solve the small dense system M X = I by LU with partial pivoting.
fn invert_dense(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 1e-14, "singular Vandermonde matrix");
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[row][j] -= f * m[col][j];
                        inv[row][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1 && degree <= 8, "Lagrange degree out of range");
        let (nodes, node_kinds) = lattice_nodes(degree);
        let mut monomials = Vec::new();
        for total in 0..=degree {
            for a in (0..=total).rev() {
                monomials.push((a as u32, (total - a) as u32));
            }
        }
        assert_eq!(monomials.len(), nodes.len());
        let vandermonde: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&[x, y]| {
                monomials
                    .iter()
                    .map(|&(a, b)| x.powi(a as i32) * y.powi(b as i32))
                    .collect()
            })
            .collect();
        // column i of V^{-1} holds the monomial coefficients of basis i
        let vinv = invert_dense(vandermonde);
        let n = nodes.len();
        let coeffs: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|m| vinv[m][i]).collect()).collect();
        Self { degree, nodes, node_kinds, coeffs, monomials }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_interior(&self) -> usize {
        self.node_kinds
            .iter()
            .filter(|k| matches!(k, NodeKind::Interior(_)))
            .count()
    }

    /// Values and reference gradients of all shape functions at (x, y).
    pub fn eval(&self, x: f64, y: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let nm = self.monomials.len();
        let mut mono = vec![0.0; nm];
        let mut dmono = vec![[0.0; 2]; nm];
        for (m, &(a, b)) in self.monomials.iter().enumerate() {
            let (ai, bi) = (a as i32, b as i32);
            mono[m] = x.powi(ai) * y.powi(bi);
            dmono[m][0] = if a == 0 { 0.0 } else { a as f64 * x.powi(ai - 1) * y.powi(bi) };
            dmono[m][1] = if b == 0 { 0.0 } else { b as f64 * x.powi(ai) * y.powi(bi - 1) };
        }
        let n = self.len();
        let mut values = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        for i in 0..n {
            let c = &self.coeffs[i];
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for m in 0..nm {
                v += c[m] * mono[m];
                gx += c[m] * dmono[m][0];
                gy += c[m] * dmono[m][1];
            }
            values[i] = v;
            grads[i] = [gx, gy];
        }
        (values, grads)
    }
}

/// Cubic bubble l0*l1*l2 = (1-x-y)xy; value and reference gradient.
pub fn bubble(x: f64, y: f64) -> (f64, [f64; 2]) {
    let value = (1.0 - x - y) * x * y;
    let gx = y * (1.0 - 2.0 * x - y);
    let gy = x * (1.0 - x - 2.0 * y);
    (value, [gx, gy])
}
