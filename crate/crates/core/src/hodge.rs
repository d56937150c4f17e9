//! Diagonal Hodge stars built from the dual measures.

use std::fmt::Write as _;

use crate::dual::DualMetrics;
use crate::mesh::TriangleMesh;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HodgeRole {
    /// primal edges → dual edges: dual length / primal length
    Hodge11,
    /// primal vertices → dual cells: dual area
    Hodge02,
    /// dual cells → primal vertices: 1 / dual area
    Hodge20,
}

/// A diagonal operator; off-diagonal data cannot be represented.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOperator {
    role: HodgeRole,
    diagonal: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(role: HodgeRole, diagonal: Vec<f64>) -> Self {
        DiagonalOperator { role, diagonal }
    }

    pub fn role(&self) -> HodgeRole {
        self.role
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.diagonal.len());
        self.diagonal.iter().zip(x).map(|(d, v)| d * v).collect()
    }

    /// `index,value` lines with a header naming the index kind.
    pub fn to_csv(&self) -> String {
        let key = match self.role {
            HodgeRole::Hodge11 => "edge",
            HodgeRole::Hodge02 | HodgeRole::Hodge20 => "vertex",
        };
        let mut s = format!("{key},value\n");
        for (i, v) in self.diagonal.iter().enumerate() {
            let _ = writeln!(s, "{i},{v:.16e}");
        }
        s
    }
}

/// `M₁,₁`: signed dual edge length over primal edge length. Entries may be
/// zero (right angles) or negative (non-Delaunay configurations).
pub fn hodge_1_1(mesh: &TriangleMesh, metrics: &DualMetrics) -> Result<DiagonalOperator> {
    if metrics.dual_edge_length.len() != mesh.num_edges() {
        return Err(Error::DimensionMismatch("dual metrics do not match mesh edges".into()));
    }
    let diagonal = (0..mesh.num_edges())
        .map(|e| {
            let len = mesh.edge_length(e);
            if len == 0.0 {
                return Err(Error::InvalidMesh(format!("edge {e} has zero length")));
            }
            Ok(metrics.dual_edge_length[e] / len)
        })
        .collect::<Result<_>>()?;
    Ok(DiagonalOperator::new(HodgeRole::Hodge11, diagonal))
}

/// `M₀,₂`: signed dual cell areas.
pub fn hodge_0_2(mesh: &TriangleMesh, metrics: &DualMetrics) -> Result<DiagonalOperator> {
    if metrics.dual_vertex_area.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch("dual metrics do not match mesh vertices".into()));
    }
    if let Some(v) = metrics.dual_vertex_area.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroDualArea(v));
    }
    Ok(DiagonalOperator::new(HodgeRole::Hodge02, metrics.dual_vertex_area.clone()))
}

/// `M₂,₀ = (M₀,₂)⁻¹`.
pub fn hodge_2_0(hodge_0_2: &DiagonalOperator) -> Result<DiagonalOperator> {
    if let Some(v) = hodge_0_2.diagonal.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroDualArea(v));
    }
    Ok(DiagonalOperator::new(
        HodgeRole::Hodge20,
        hodge_0_2.diagonal.iter().map(|a| 1.0 / a).collect(),
    ))
}
