//! Incidence matrices: the boundary operators `∂₂,₁`, `∂₁,₀`, the discrete
//! derivative `d₀ = (∂₁,₀)ᵀ`, and the dual boundary `∂₂,₁^dual = -(∂₁,₀)ᵀ`.
//!
//! Entries are kept as small integers so that identities such as `∂∘∂ = 0`
//! hold exactly. Rows always index the lower-dimensional cells of a boundary
//! operator.
//!
//! With the canonical mesh tables, an edge `[i, j]` is oriented from the
//! lower to the higher vertex index. The `*_from` constructors accept an
//! arbitrary oriented edge list instead, for reproducing a hand-chosen
//! numbering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::linalg::SparseMatrix;
use crate::mesh::TriangleMesh;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorRole {
    Boundary21,
    Boundary10,
    Derivative01,
    DualBoundary21,
}

/// Sparse matrix with entries in `{-1, +1}`, sorted by `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    role: OperatorRole,
    entries: Vec<(usize, usize, i8)>,
}

impl IncidenceMatrix {
    fn from_entries(
        rows: usize,
        cols: usize,
        role: OperatorRole,
        mut entries: Vec<(usize, usize, i8)>,
    ) -> Self {
        entries.sort_unstable();
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1)));
        IncidenceMatrix {
            rows,
            cols,
            role,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn entries(&self) -> &[(usize, usize, i8)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(row, col)))
            .map(|i| self.entries[i].2)
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        let mut d = vec![vec![0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            d[r][c] = v;
        }
        d
    }

    pub fn transpose(&self, role: OperatorRole) -> Self {
        let entries = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        Self::from_entries(self.cols, self.rows, role, entries)
    }

    fn negated(&self, role: OperatorRole) -> Self {
        let entries = self.entries.iter().map(|&(r, c, v)| (r, c, -v)).collect();
        Self::from_entries(self.rows, self.cols, role, entries)
    }

    /// Exact integer product `self · rhs`, as its nonzero entries.
    pub fn compose(&self, rhs: &IncidenceMatrix) -> Result<Vec<(usize, usize, i64)>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut rhs_rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); rhs.rows];
        for &(r, c, v) in &rhs.entries {
            rhs_rows[r].push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for &(r, k, a) in &self.entries {
            for &(c, b) in &rhs_rows[k] {
                *acc.entry((r, c)).or_default() += i64::from(a) * i64::from(b);
            }
        }
        Ok(acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((r, c), v)| (r, c, v))
            .collect())
    }

    /// Promotes to a real CSR matrix.
    pub fn to_sparse(&self) -> SparseMatrix {
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, f64::from(v)))
            .collect();
        SparseMatrix::from_triplets(self.rows, self.cols, triplets)
    }

    /// MatrixMarket `coordinate integer general` text (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate integer general\n");
        let _ = writeln!(s, "% {:?}", self.role);
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.entries.len());
        for &(r, c, v) in &self.entries {
            let _ = writeln!(s, "{} {} {}", r + 1, c + 1, v);
        }
        s
    }
}

/// `∂₂,₁` for an explicit oriented edge list: entry `(e, t)` is `+1` when the
/// cyclic traversal `a → b → c → a` of triangle `t` runs along edge `e` in its
/// given direction and `-1` when it runs against it.
pub fn boundary_2_1_from(triangles: &[[usize; 3]], edges: &[[usize; 2]]) -> Result<IncidenceMatrix> {
    let lookup: BTreeMap<(usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| ((a.min(b), a.max(b)), e))
        .collect();
    if lookup.len() != edges.len() {
        return Err(Error::InvalidMesh("edge list contains duplicates".into()));
    }
    let mut entries = Vec::with_capacity(3 * triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (from, to) = (tri[k], tri[(k + 1) % 3]);
            let e = *lookup.get(&(from.min(to), from.max(to))).ok_or_else(|| {
                Error::InvalidMesh(format!("edge ({from}, {to}) of triangle {t} is not listed"))
            })?;
            let sign = if edges[e] == [from, to] { 1 } else { -1 };
            entries.push((e, t, sign));
        }
    }
    Ok(IncidenceMatrix::from_entries(
        edges.len(),
        triangles.len(),
        OperatorRole::Boundary21,
        entries,
    ))
}

/// `∂₁,₀` for an explicit oriented edge list: `∂[i, j] = [j] - [i]`.
pub fn boundary_1_0_from(num_vertices: usize, edges: &[[usize; 2]]) -> Result<IncidenceMatrix> {
    let mut entries = Vec::with_capacity(2 * edges.len());
    for (e, &[i, j]) in edges.iter().enumerate() {
        if i >= num_vertices || j >= num_vertices {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                count: num_vertices,
            });
        }
        if i == j {
            return Err(Error::InvalidMesh(format!("edge {e} is a loop")));
        }
        entries.push((i, e, -1));
        entries.push((j, e, 1));
    }
    Ok(IncidenceMatrix::from_entries(
        num_vertices,
        edges.len(),
        OperatorRole::Boundary10,
        entries,
    ))
}

/// `∂₂,₁`: rows = edges, columns = triangles.
pub fn boundary_2_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    let mut entries = Vec::with_capacity(3 * mesh.num_triangles());
    for (t, local) in mesh.edge_of_triangle().iter().enumerate() {
        for &(e, sign) in local {
            entries.push((e, t, sign));
        }
    }
    IncidenceMatrix::from_entries(
        mesh.num_edges(),
        mesh.num_triangles(),
        OperatorRole::Boundary21,
        entries,
    )
}

/// `∂₁,₀`: rows = vertices, columns = edges; `-1` at the lower index, `+1` at
/// the higher.
pub fn boundary_1_0(mesh: &TriangleMesh) -> IncidenceMatrix {
    boundary_1_0_from(mesh.num_vertices(), mesh.edges()).expect("mesh edges are valid")
}

/// Discrete gradient `d₀ = (∂₁,₀)ᵀ`: rows = edges, columns = vertices.
pub fn derivative_0_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    boundary_1_0(mesh).transpose(OperatorRole::Derivative01)
}

/// `∂₂,₁^dual = -(∂₁,₀)ᵀ`: rows = dual edges (one per primal edge), columns =
/// dual cells (one per primal vertex).
pub fn dual_boundary_2_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    derivative_0_1(mesh).negated(OperatorRole::DualBoundary21)
}

/// Same as [`dual_boundary_2_1`] for an already-built `∂₁,₀`.
pub fn dual_boundary_from(boundary_1_0: &IncidenceMatrix) -> IncidenceMatrix {
    boundary_1_0
        .transpose(OperatorRole::DualBoundary21)
        .negated(OperatorRole::DualBoundary21)
}
