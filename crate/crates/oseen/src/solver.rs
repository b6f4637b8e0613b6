//! Sparse direct solve of the assembled nonsymmetric saddle-point system.
//!
//! Left-looking (Gilbert-Peierls) sparse LU with threshold partial pivoting,
//! preceded by a reverse Cuthill-McKee reordering of the symmetrized pattern.
//! The pressure-mean multiplier row is kept at the end of the elimination
//! order so its dense coupling does not spread fill.

use thiserror::Error;

use crate::assembly::SparseSystem;
use crate::sparse::{CscMatrix, CsrMatrix};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is numerically singular at elimination step {0}")]
    Singular(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: matrix is {n}x{n}, rhs has length {rhs}")]
    DimensionMismatch { n: usize, rhs: usize },
    #[error("residual contract unmet: relative residual {0:.3e} > {1:.3e}")]
    ResidualTooLarge(f64, f64),
}

/// Relative algebraic residual the solver must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Diagonal-preference threshold for partial pivoting.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Reverse Cuthill-McKee ordering of an undirected adjacency structure;
/// returns `perm` with `perm[new] = old`.
fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let start = match (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (adj[i].len(), i))
        {
            Some(s) => s,
            None => break,
        };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (adj[v].len(), v));
            for v in nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Fill-reducing permutation for the system: RCM on the symmetrized pattern,
/// with the rows listed in `order_last` forced to the end.
fn fill_reducing_permutation(a: &CsrMatrix, order_last: &[usize]) -> Vec<usize> {
    let n = a.n_rows;
    let last: std::collections::BTreeSet<usize> = order_last.iter().copied().collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for (c, _) in a.row(r) {
            if r != c && !last.contains(&r) && !last.contains(&c) {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut perm: Vec<usize> = reverse_cuthill_mckee(&adj)
        .into_iter()
        .filter(|i| !last.contains(i))
        .collect();
    perm.extend(order_last.iter().copied());
    debug_assert_eq!(perm.len(), n);
    perm
}

/// LU factors of P (A permuted symmetrically by `perm`) = L U.
pub struct SparseLu {
    n: usize,
    /// perm[new] = old; the symmetric fill-reducing permutation.
    perm: Vec<usize>,
    /// row pivot: pinv[permuted_row] = pivot position.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<u32>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<u32>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix, order_last: &[usize]) -> Result<Self, SolverError> {
        assert_eq!(a.n_rows, a.n_cols);
        if !a.is_finite() {
            return Err(SolverError::NonFinite);
        }
        let n = a.n_rows;
        let perm = fill_reducing_permutation(a, order_last);
        let mut pos = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        // permuted matrix in CSC: column new_j holds A(perm, perm[new_j])
        let csc = {
            let mut t = crate::sparse::Triplets::new(n, n);
            for r in 0..n {
                for (c, v) in a.row(r) {
                    t.push(pos[r], pos[c], v);
                }
            }
            t.to_csr().to_csc()
        };
        Self::factor_csc(&csc, perm)
    }

    fn factor_csc(a: &CscMatrix, perm: Vec<usize>) -> Result<Self, SolverError> {
        let n = a.n_cols;
        const UNSET: usize = usize::MAX;
        let mut pinv = vec![UNSET; n];
        let mut pivot_row_of = vec![UNSET; n]; // pivot position -> permuted row

        let mut l_ptr = vec![0usize];
        let mut l_idx: Vec<u32> = Vec::new();
        let mut l_val: Vec<f64> = Vec::new();
        let mut u_ptr = vec![0usize];
        let mut u_idx: Vec<u32> = Vec::new();
        let mut u_val: Vec<f64> = Vec::new();
        let mut u_diag = vec![0.0; n];

        let mut x = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut topo: Vec<usize> = Vec::with_capacity(n);
        // iterative DFS stacks
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for j in 0..n {
            topo.clear();
            // symbolic: reach of A(:,j) through columns of L
            for k in a.col_ptr[j]..a.col_ptr[j + 1] {
                let root = a.row_idx[k];
                if mark[root] == j {
                    continue;
                }
                stack.push((root, 0));
                mark[root] = j;
                while let Some(&(node, child_pos)) = stack.last() {
                    let p = pinv[node];
                    let mut pushed = false;
                    if p != UNSET {
                        let (s, e) = (l_ptr[p], l_ptr[p + 1]);
                        let mut cp = child_pos;
                        while s + cp < e {
                            let next = l_idx[s + cp] as usize;
                            cp += 1;
                            if mark[next] != j {
                                mark[next] = j;
                                stack.last_mut().unwrap().1 = cp;
                                stack.push((next, 0));
                                pushed = true;
                                break;
                            }
                        }
                        if !pushed {
                            stack.last_mut().unwrap().1 = cp;
                        }
                    }
                    if !pushed {
                        topo.push(node);
                        stack.pop();
                    }
                }
            }
            // topo holds nodes in post-order: children before parents, which
            // is the elimination order we need reversed
            topo.reverse();

            // numeric solve x = L \ A(:,j)
            for k in a.col_ptr[j]..a.col_ptr[j + 1] {
                x[a.row_idx[k]] = a.values[k];
            }
            for &node in &topo {
                let p = pinv[node];
                if p == UNSET {
                    continue;
                }
                let xj = x[node];
                if xj != 0.0 {
                    for k in l_ptr[p]..l_ptr[p + 1] {
                        let r = l_idx[k] as usize;
                        // symbolic reachability already visited every row
                        // that can receive an update
                        debug_assert_eq!(mark[r], j);
                        x[r] -= l_val[k] * xj;
                    }
                }
            }

            // pivot selection among non-pivotal rows
            let mut best = UNSET;
            let mut best_abs = 0.0f64;
            for &node in &topo {
                if pinv[node] == UNSET {
                    let v = x[node].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = node;
                    }
                }
            }
            if best == UNSET || best_abs == 0.0 || !best_abs.is_finite() {
                return Err(SolverError::Singular(j));
            }
            // prefer the natural diagonal when it is large enough
            if pinv[j] == UNSET && mark[j] == j && x[j].abs() >= PIVOT_THRESHOLD * best_abs {
                best = j;
            }
            let pivot = x[best];

            // store U column j (pivotal rows) and L column j (non-pivotal)
            for &node in &topo {
                if node == best {
                    continue;
                }
                let v = x[node];
                if pinv[node] != UNSET {
                    if v != 0.0 {
                        u_idx.push(pinv[node] as u32);
                        u_val.push(v);
                    }
                } else if v != 0.0 {
                    l_idx.push(node as u32);
                    l_val.push(v / pivot);
                }
            }
            u_diag[j] = pivot;
            u_ptr.push(u_idx.len());
            l_ptr.push(l_idx.len());
            pinv[best] = j;
            pivot_row_of[j] = best;

            for &node in &topo {
                x[node] = 0.0;
            }
        }

        // remap L row indices from permuted-row space to pivot positions
        for idx in l_idx.iter_mut() {
            *idx = pinv[*idx as usize] as u32;
        }

        Ok(Self { n, perm, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, u_diag })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        if b.len() != self.n {
            return Err(SolverError::DimensionMismatch { n: self.n, rhs: b.len() });
        }
        let n = self.n;
        // c = P (b permuted by perm)
        let mut c = vec![0.0; n];
        for new in 0..n {
            c[self.pinv[new]] = b[self.perm[new]];
        }
        // L z = c (unit lower triangular, stored by column)
        for j in 0..n {
            let zj = c[j];
            if zj != 0.0 {
                for k in self.l_ptr[j]..self.l_ptr[j + 1] {
                    c[self.l_idx[k] as usize] -= self.l_val[k] * zj;
                }
            }
        }
        // U y = z (columns backward)
        for j in (0..n).rev() {
            let yj = c[j] / self.u_diag[j];
            c[j] = yj;
            if yj != 0.0 {
                for k in self.u_ptr[j]..self.u_ptr[j + 1] {
                    c[self.u_idx[k] as usize] -= self.u_val[k] * yj;
                }
            }
        }
        // undo the symmetric permutation
        let mut x = vec![0.0; n];
        for new in 0..n {
            x[self.perm[new]] = c[new];
        }
        Ok(x)
    }

    pub fn nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len() + self.n
    }
}

/// Solve diagnostics attached to a solution.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub relative_residual: f64,
    pub factor_nnz: usize,
    pub dimension: usize,
}

/// Coefficient vectors of the discrete triple (u_h, omega_h, p_h).
#[derive(Debug, Clone)]
pub struct SolutionTriple {
    pub velocity: Vec<f64>,
    pub vorticity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub multiplier: f64,
    pub diagnostics: SolveDiagnostics,
}

impl SolutionTriple {
    /// Full unknown vector in the global (u, omega, p, lambda) ordering.
    pub fn concatenated(&self) -> Vec<f64> {
        let mut x =
            Vec::with_capacity(self.velocity.len() + self.vorticity.len() + self.pressure.len() + 1);
        x.extend_from_slice(&self.velocity);
        x.extend_from_slice(&self.vorticity);
        x.extend_from_slice(&self.pressure);
        x.push(self.multiplier);
        x
    }
}

/// Direct solve of the assembled system; the relative algebraic residual
/// must meet [`RESIDUAL_TOL`].
pub fn solve(system: &SparseSystem) -> Result<SolutionTriple, SolverError> {
    let a = &system.matrix;
    let b = &system.rhs;
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let lu = SparseLu::factor(a, &[system.multiplier_index()])?;
    let x = lu.solve(b)?;

    let r = a.matvec(&x);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rnorm = r
        .iter()
        .zip(b.iter())
        .map(|(ri, bi)| (ri - bi) * (ri - bi))
        .sum::<f64>()
        .sqrt();
    let relative_residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
    if relative_residual > RESIDUAL_TOL {
        return Err(SolverError::ResidualTooLarge(relative_residual, RESIDUAL_TOL));
    }

    let (vr, wr, pr) = (
        system.velocity_range.clone(),
        system.vorticity_range.clone(),
        system.pressure_range.clone(),
    );
    Ok(SolutionTriple {
        velocity: x[vr].to_vec(),
        vorticity: x[wr].to_vec(),
        pressure: x[pr].to_vec(),
        multiplier: x[system.multiplier_index()],
        diagnostics: SolveDiagnostics {
            relative_residual,
            factor_nnz: lu.nnz(),
            dimension: a.n_rows,
        },
    })
}
