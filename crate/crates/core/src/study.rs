//! Disk benchmark: `κ = 1`, `q = -1`, `u = 10` on the rim of the unit disk.
//! The exact solution is `u(r) = (1 - r²)/4 + 10` with flux magnitude `r/2`.

use std::fmt::Write as _;

use crate::femref::solve_fem;
use crate::mesh::{gen_disk_mesh, Point2, TriangleMesh, DISK_OUTER_MARKER};
use crate::par::{map_slice, Execution};
use crate::poisson::{solve_problem, Method, PoissonProblem, SolveOptions, SolveReport, Source};
use crate::{Error, Result};

/// Errors at or below this level are treated as exact; no order is
/// reported for them.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

pub fn disk_exact(p: Point2) -> f64 {
    0.25 * (1.0 - p.x * p.x - p.y * p.y) + 10.0
}

pub fn disk_exact_flux(p: Point2) -> f64 {
    0.5 * p.norm()
}

pub fn disk_problem(mesh: &TriangleMesh) -> PoissonProblem {
    PoissonProblem::new(1.0, Source::Uniform(-1.0)).dirichlet_on_marker(mesh, DISK_OUTER_MARKER, 10.0)
}

pub fn solve_with(method: Method, mesh: &TriangleMesh, problem: &PoissonProblem, opts: &SolveOptions) -> Result<SolveReport> {
    match method {
        Method::Dec => solve_problem(mesh, problem, opts),
        Method::Fem => solve_fem(mesh, problem, opts),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub rings: usize,
    pub nodes: usize,
    pub elements: usize,
    pub dec_max: f64,
    pub fem_max: f64,
    pub dec_max_flux: f64,
    pub fem_max_flux: f64,
}

fn check_rings(rings: &[usize]) -> Result<()> {
    if rings.is_empty() {
        return Err(Error::Config("no refinement levels given".into()));
    }
    if rings.contains(&0) {
        return Err(Error::Config("ring counts must be at least 1".into()));
    }
    Ok(())
}

/// Solves the disk problem with both methods at each level. Levels run
/// concurrently under [`Execution::Parallel`]; rows keep the input order.
pub fn compare_disk(rings: &[usize], opts: &SolveOptions, exec: Execution) -> Result<Vec<CompareRow>> {
    check_rings(rings)?;
    map_slice(rings, exec, |&r| {
        let mesh = gen_disk_mesh(r);
        let problem = disk_problem(&mesh);
        let dec = solve_problem(&mesh, &problem, opts)?;
        let fem = solve_fem(&mesh, &problem, opts)?;
        Ok(CompareRow {
            rings: r,
            nodes: mesh.num_vertices(),
            elements: mesh.num_triangles(),
            dec_max: dec.max_solution,
            fem_max: fem.max_solution,
            dec_max_flux: dec.max_flux_magnitude,
            fem_max_flux: fem.max_flux_magnitude,
        })
    })
    .into_iter()
    .collect()
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("rings,nodes,elements,dec_max_u,fem_max_u,dec_max_flux,fem_max_flux\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.rings, r.nodes, r.elements, r.dec_max, r.fem_max, r.dec_max_flux, r.fem_max_flux
        );
    }
    s
}

pub fn compare_text(rows: &[CompareRow]) -> String {
    let mut s = format!(
        "{:>6} {:>6} {:>8} {:>12} {:>12} {:>12} {:>12}\n",
        "rings", "nodes", "elements", "DEC max u", "FEM max u", "DEC flux", "FEM flux"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>6} {:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.rings, r.nodes, r.elements, r.dec_max, r.fem_max, r.dec_max_flux, r.fem_max_flux
        );
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    /// max nodal deviation
    pub linf: f64,
    /// root mean square nodal deviation over all vertices
    pub l2: f64,
    /// max deviation of the linear interpolant at triangle centroids
    pub centroid_linf: f64,
}

pub fn error_norms(mesh: &TriangleMesh, solution: &[f64], exact: impl Fn(Point2) -> f64) -> ErrorNorms {
    let mut linf = 0.0f64;
    let mut sq = 0.0;
    for (v, p) in mesh.vertices().iter().enumerate() {
        let e = (solution[v] - exact(*p)).abs();
        linf = linf.max(e);
        sq += e * e;
    }
    let mut centroid_linf = 0.0f64;
    for [a, b, c] in mesh.triangles() {
        let (pa, pb, pc) = (mesh.vertex(*a), mesh.vertex(*b), mesh.vertex(*c));
        let g = Point2::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0);
        let uh = (solution[*a] + solution[*b] + solution[*c]) / 3.0;
        centroid_linf = centroid_linf.max((uh - exact(g)).abs());
    }
    ErrorNorms {
        linf,
        l2: (sq / mesh.num_vertices() as f64).sqrt(),
        centroid_linf,
    }
}

/// `log(e_c/e_f) / log(h_c/h_f)`, or `None` when either error is at
/// roundoff level.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Option<f64> {
    if e_coarse <= ROUNDOFF_FLOOR || e_fine <= ROUNDOFF_FLOOR {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub method: Method,
    pub rings: usize,
    /// longest edge
    pub h: f64,
    pub errors: ErrorNorms,
    pub order_linf: Option<f64>,
    pub order_l2: Option<f64>,
    pub order_centroid: Option<f64>,
}

/// Error norms against the exact disk solution for each level, with observed
/// orders between consecutive levels.
pub fn convergence_disk(method: Method, rings: &[usize], opts: &SolveOptions, exec: Execution) -> Result<Vec<ConvergenceRow>> {
    check_rings(rings)?;
    let levels: Vec<(usize, f64, ErrorNorms)> = map_slice(rings, exec, |&r| {
        let mesh = gen_disk_mesh(r);
        let report = solve_with(method, &mesh, &disk_problem(&mesh), opts)?;
        Ok((r, mesh.max_edge_length(), error_norms(&mesh, &report.solution, disk_exact)))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(i, &(rings, h, errors))| {
            let prev = i.checked_sub(1).map(|j| levels[j]);
            let order = |f: fn(&ErrorNorms) -> f64| prev.and_then(|(_, hp, ep)| observed_order(f(&ep), f(&errors), hp, h));
            ConvergenceRow {
                method,
                rings,
                h,
                errors,
                order_linf: order(|e| e.linf),
                order_l2: order(|e| e.l2),
                order_centroid: order(|e| e.centroid_linf),
            }
        })
        .collect())
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let opt = |o: Option<f64>| o.map_or(String::new(), |v| format!("{v:.6}"));
    let mut s = String::from("method,rings,h,linf,l2,centroid_linf,order_linf,order_l2,order_centroid\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.method,
            r.rings,
            r.h,
            r.errors.linf,
            r.errors.l2,
            r.errors.centroid_linf,
            opt(r.order_linf),
            opt(r.order_l2),
            opt(r.order_centroid)
        );
    }
    s
}
