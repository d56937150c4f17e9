//! Circumcentric dual mesh measures with intrinsic signs.
//!
//! Every measure is assembled from per-triangle pieces computed with
//! determinants, so a circumcenter that falls outside an obtuse triangle
//! automatically contributes negative length and area. Boundary dual cells
//! are closed by the midpoints of the primal boundary edges and the primal
//! vertex itself.

use crate::mesh::{signed_area_of, Point2, TriangleMesh};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Point equidistant from `a`, `b` and `c`.
pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Result<Point2> {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let d = 2.0 * ab.cross(ac);
    let scale = ab.norm().max(ac.norm()).max(c.dist(b));
    if d.abs() <= 2e-14 * scale * scale {
        return Err(Error::InvalidMesh(format!(
            "collinear points ({}, {}), ({}, {}), ({}, {}) have no circumcenter",
            a.x, a.y, b.x, b.y, c.x, c.y
        )));
    }
    let ab2 = ab.x * ab.x + ab.y * ab.y;
    let ac2 = ac.x * ac.x + ac.y * ac.y;
    Ok(Point2::new(
        a.x + (ac.y * ab2 - ab.y * ac2) / d,
        a.y + (ab.x * ac2 - ac.x * ab2) / d,
    ))
}

/// Signed distance from `center` to the line `from → to`, positive on the
/// left (the interior side of a counterclockwise triangle).
fn signed_offset(from: Point2, to: Point2, center: Point2) -> f64 {
    let dir = to.sub(from);
    dir.cross(center.sub(from)) / dir.norm()
}

/// Contribution of triangle `tri` to the dual length of `edge`: the signed
/// distance from the triangle's circumcenter to the edge, positive when the
/// circumcenter is on the same side as the opposite vertex.
pub fn signed_dual_edge_contribution(tri: usize, edge: usize, mesh: &TriangleMesh) -> Result<f64> {
    let k = mesh.edge_of_triangle()[tri]
        .iter()
        .position(|&(e, _)| e == edge)
        .ok_or(Error::EdgeNotInTriangle { triangle: tri, edge })?;
    let p = mesh.triangle_points(tri);
    let c = circumcenter(p[0], p[1], p[2])?;
    Ok(signed_offset(p[(k + 1) % 3], p[(k + 2) % 3], c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualMetrics {
    pub circumcenters: Vec<Point2>,
    /// Signed length of the dual edge of each primal edge.
    pub dual_edge_length: Vec<f64>,
    /// Signed area of the dual cell of each primal vertex.
    pub dual_vertex_area: Vec<f64>,
}

struct TrianglePieces {
    center: Point2,
    /// per local edge (opposite corner k)
    edge: [f64; 3],
    /// per corner
    corner: [f64; 3],
}

fn triangle_pieces(p: [Point2; 3]) -> Result<TrianglePieces> {
    let center = circumcenter(p[0], p[1], p[2])?;
    let mut edge = [0.0; 3];
    for (k, slot) in edge.iter_mut().enumerate() {
        *slot = signed_offset(p[(k + 1) % 3], p[(k + 2) % 3], center);
    }
    let mut corner = [0.0; 3];
    for (k, slot) in corner.iter_mut().enumerate() {
        let v = p[k];
        let next = p[(k + 1) % 3];
        let prev = p[(k + 2) % 3];
        // the two kite halves (v, m_next, c) and (v, c, m_prev)
        *slot = signed_area_of(v, v.midpoint(next), center)
            + signed_area_of(v, center, v.midpoint(prev));
    }
    Ok(TrianglePieces { center, edge, corner })
}

pub fn dual_metrics(mesh: &TriangleMesh) -> Result<DualMetrics> {
    dual_metrics_with(mesh, Execution::default())
}

/// Per-triangle pieces are computed (possibly in parallel) and then
/// scattered in triangle order, so sums do not depend on the thread count.
pub fn dual_metrics_with(mesh: &TriangleMesh, exec: Execution) -> Result<DualMetrics> {
    let pieces = par::map_range(mesh.num_triangles(), exec, |t| triangle_pieces(mesh.triangle_points(t)));
    let mut circumcenters = Vec::with_capacity(mesh.num_triangles());
    let mut dual_edge_length = vec![0.0; mesh.num_edges()];
    let mut dual_vertex_area = vec![0.0; mesh.num_vertices()];
    for (t, piece) in pieces.into_iter().enumerate() {
        let piece = piece?;
        circumcenters.push(piece.center);
        let tri = mesh.triangles()[t];
        for k in 0..3 {
            dual_edge_length[mesh.edge_of_triangle()[t][k].0] += piece.edge[k];
            dual_vertex_area[tri[k]] += piece.corner[k];
        }
    }
    Ok(DualMetrics {
        circumcenters,
        dual_edge_length,
        dual_vertex_area,
    })
}

/// Triangles whose circumcenter lies strictly outside (non-well-centered);
/// these are the ones that produce negative dual contributions.
pub fn non_well_centered(mesh: &TriangleMesh) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for t in 0..mesh.num_triangles() {
        let pieces = triangle_pieces(mesh.triangle_points(t))?;
        if pieces.edge.iter().any(|&h| h < 0.0) {
            out.push(t);
        }
    }
    Ok(out)
}
