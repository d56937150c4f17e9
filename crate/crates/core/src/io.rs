//! File output: mesh files, field CSVs and legacy ASCII VTK.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dual::DualMetrics;
use crate::mesh::{load_mesh, save_mesh, Point2, TriangleMesh};
use crate::poisson::SolveReport;
use crate::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `<prefix>.node` and `<prefix>.ele`.
pub fn mesh_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".node"), with(".ele"))
}

pub fn read_mesh(node: &Path, ele: &Path) -> Result<TriangleMesh> {
    load_mesh(&read_text(node)?, &read_text(ele)?)
}

pub fn write_mesh(mesh: &TriangleMesh, prefix: &Path) -> Result<()> {
    let (node_path, ele_path) = mesh_paths(prefix);
    let (node, ele) = save_mesh(mesh);
    write_text(&node_path, &node)?;
    write_text(&ele_path, &ele)
}

/// `vertex,x,y,u,flux_mag` rows at full precision.
pub fn solution_csv(mesh: &TriangleMesh, report: &SolveReport) -> String {
    let mut s = String::from("vertex,x,y,u,flux_mag\n");
    for (v, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(
            s,
            "{v},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.x, p.y, report.solution[v], report.flux_magnitude_per_vertex[v]
        );
    }
    s
}

fn vtk_header(s: &mut String, title: &str, points: &[Point2]) {
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in points {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p.x, p.y);
    }
}

/// Solution as an unstructured grid: point scalars `u` and `flux_magnitude`,
/// cell vectors `flux`.
pub fn solution_vtk(mesh: &TriangleMesh, report: &SolveReport, title: &str) -> String {
    let mut s = String::new();
    vtk_header(&mut s, title, mesh.vertices());
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.num_vertices());
    let _ = writeln!(s, "SCALARS u double 1\nLOOKUP_TABLE default");
    for u in &report.solution {
        let _ = writeln!(s, "{u:.16e}");
    }
    let _ = writeln!(s, "SCALARS flux_magnitude double 1\nLOOKUP_TABLE default");
    for f in &report.flux_magnitude_per_vertex {
        let _ = writeln!(s, "{f:.16e}");
    }
    let _ = writeln!(s, "CELL_DATA {nt}");
    let _ = writeln!(s, "VECTORS flux double");
    for [fx, fy] in &report.flux_per_triangle {
        let _ = writeln!(s, "{fx:.16e} {fy:.16e} 0");
    }
    s
}

/// End points of each dual edge: the two adjacent circumcenters, or the
/// circumcenter and the edge midpoint on the boundary.
pub fn dual_edge_segments(mesh: &TriangleMesh, metrics: &DualMetrics) -> Vec<[Point2; 2]> {
    (0..mesh.num_edges())
        .map(|e| {
            let (t0, t1) = mesh.edge_triangles(e);
            let end = match t1 {
                Some(t1) => metrics.circumcenters[t1],
                None => {
                    let [a, b] = mesh.edges()[e];
                    mesh.vertex(a).midpoint(mesh.vertex(b))
                }
            };
            [metrics.circumcenters[t0], end]
        })
        .collect()
}

/// Primal triangles plus dual edges as line cells. Points are the primal
/// vertices, then the circumcenters, then boundary edge midpoints. Cell
/// scalars: `kind` (0 triangle, 1 dual edge) and `measure` (signed area or
/// signed dual length).
pub fn dual_vtk(mesh: &TriangleMesh, metrics: &DualMetrics) -> String {
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut points = mesh.vertices().to_vec();
    points.extend_from_slice(&metrics.circumcenters);
    let mut lines = Vec::with_capacity(mesh.num_edges());
    for e in 0..mesh.num_edges() {
        let (t0, t1) = mesh.edge_triangles(e);
        let end = match t1 {
            Some(t1) => nv + t1,
            None => {
                let [a, b] = mesh.edges()[e];
                points.push(mesh.vertex(a).midpoint(mesh.vertex(b)));
                points.len() - 1
            }
        };
        lines.push([nv + t0, end]);
    }

    let mut s = String::new();
    vtk_header(&mut s, "circumcentric dual mesh", &points);
    let ncells = nt + lines.len();
    let _ = writeln!(s, "CELLS {ncells} {}", 4 * nt + 3 * lines.len());
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    for [a, b] in &lines {
        let _ = writeln!(s, "2 {a} {b}");
    }
    let _ = writeln!(s, "CELL_TYPES {ncells}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    for _ in &lines {
        s.push_str("3\n");
    }
    let _ = writeln!(s, "CELL_DATA {ncells}");
    let _ = writeln!(s, "SCALARS kind int 1\nLOOKUP_TABLE default");
    for i in 0..ncells {
        let _ = writeln!(s, "{}", u8::from(i >= nt));
    }
    let _ = writeln!(s, "SCALARS measure double 1\nLOOKUP_TABLE default");
    for t in 0..nt {
        let _ = writeln!(s, "{:.16e}", mesh.triangle_area(t));
    }
    for l in &metrics.dual_edge_length {
        let _ = writeln!(s, "{l:.16e}");
    }
    let _ = writeln!(s, "POINT_DATA {}", points.len());
    let _ = writeln!(s, "SCALARS dual_area double 1\nLOOKUP_TABLE default");
    for i in 0..points.len() {
        let a = if i < nv { metrics.dual_vertex_area[i] } else { 0.0 };
        let _ = writeln!(s, "{a:.16e}");
    }
    s
}

pub fn dual_edges_csv(mesh: &TriangleMesh, metrics: &DualMetrics) -> String {
    let mut s = String::from("edge,v0,v1,primal_length,dual_length\n");
    for (e, [a, b]) in mesh.edges().iter().enumerate() {
        let _ = writeln!(
            s,
            "{e},{a},{b},{:.16e},{:.16e}",
            mesh.edge_length(e),
            metrics.dual_edge_length[e]
        );
    }
    s
}

/// Dual vertices: one circumcenter per primal triangle.
pub fn dual_vertices_csv(metrics: &DualMetrics) -> String {
    let mut s = String::from("triangle,x,y\n");
    for (t, c) in metrics.circumcenters.iter().enumerate() {
        let _ = writeln!(s, "{t},{:.16e},{:.16e}", c.x, c.y);
    }
    s
}

/// Dual cells: one signed area per primal vertex.
pub fn dual_cells_csv(mesh: &TriangleMesh, metrics: &DualMetrics) -> String {
    let mut s = String::from("vertex,x,y,dual_area\n");
    for (v, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{v},{:.16e},{:.16e},{:.16e}", p.x, p.y, metrics.dual_vertex_area[v]);
    }
    s
}
