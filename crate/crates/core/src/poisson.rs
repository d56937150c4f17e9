//! DEC discretization of `κ Δf = q` with Dirichlet and Neumann data.
//!
//! The assembled system is
//!
//! ```text
//! κ d₀ᵀ M₁,₁ d₀ f = -M₀,₂ q + g
//! ```
//!
//! where `d₀ = (∂₁,₀)ᵀ` and `g` collects Neumann fluxes. The minus sign comes
//! from `∂₂,₁^dual = -(∂₁,₀)ᵀ`; with it the stiffness matrix is positive
//! semidefinite and `q < 0` with zero boundary data gives a positive bump.
//! Dirichlet rows are eliminated symmetrically so conjugate gradients apply.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::chains::derivative_0_1;
use crate::dual::{dual_metrics, DualMetrics};
use crate::hodge::{hodge_0_2, hodge_1_1};
use crate::linalg::{cg_solve, dense_solve, triple_product, CgOptions, DenseVector, SparseMatrix};
use crate::mesh::{signed_area_of, Point2, TriangleMesh};
use crate::par::{self, Execution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Uniform(f64),
    PerVertex(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonProblem {
    /// Diffusion constant, strictly positive.
    pub kappa: f64,
    pub source: Source,
    /// Prescribed values keyed by vertex.
    pub dirichlet: BTreeMap<usize, f64>,
    /// Outward normal flux density `κ ∂f/∂n` keyed by boundary edge.
    pub neumann: BTreeMap<usize, f64>,
}

impl PoissonProblem {
    pub fn new(kappa: f64, source: Source) -> Self {
        PoissonProblem {
            kappa,
            source,
            dirichlet: BTreeMap::new(),
            neumann: BTreeMap::new(),
        }
    }

    pub fn with_dirichlet(mut self, vertex: usize, value: f64) -> Self {
        self.dirichlet.insert(vertex, value);
        self
    }

    pub fn with_neumann(mut self, edge: usize, flux: f64) -> Self {
        self.neumann.insert(edge, flux);
        self
    }

    /// Fixes every vertex carrying `marker` to `value`.
    pub fn dirichlet_on_marker(mut self, mesh: &TriangleMesh, marker: i32, value: f64) -> Self {
        for v in mesh.vertices_with_marker(marker) {
            self.dirichlet.insert(v, value);
        }
        self
    }

    /// Fixes every boundary vertex to `f(x, y)`.
    pub fn dirichlet_on_boundary(mut self, mesh: &TriangleMesh, f: impl Fn(Point2) -> f64) -> Self {
        for &v in mesh.boundary_vertices() {
            self.dirichlet.insert(v, f(mesh.vertex(v)));
        }
        self
    }

    /// Prescribes flux density `h` on boundary edges whose endpoints both
    /// carry `marker`.
    pub fn neumann_on_marker(mut self, mesh: &TriangleMesh, marker: i32, h: f64) -> Self {
        for e in mesh.boundary_edges_with_marker(marker) {
            self.neumann.insert(e, h);
        }
        self
    }

    pub fn validate(&self, mesh: &TriangleMesh) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidProblem(format!("kappa must be positive, got {}", self.kappa)));
        }
        match &self.source {
            Source::Uniform(q) if !q.is_finite() => {
                return Err(Error::InvalidProblem("source is not finite".into()))
            }
            Source::PerVertex(q) if q.len() != mesh.num_vertices() => {
                return Err(Error::InvalidProblem(format!(
                    "source has {} values for {} vertices",
                    q.len(),
                    mesh.num_vertices()
                )))
            }
            Source::PerVertex(q) if q.iter().any(|v| !v.is_finite()) => {
                return Err(Error::InvalidProblem("source has non-finite values".into()))
            }
            _ => {}
        }
        if self.dirichlet.is_empty() {
            return Err(Error::InvalidProblem(
                "at least one Dirichlet vertex is required (pure Neumann problems are singular)".into(),
            ));
        }
        for (&v, &g) in &self.dirichlet {
            if v >= mesh.num_vertices() {
                return Err(Error::InvalidProblem(format!("Dirichlet vertex {v} does not exist")));
            }
            if !g.is_finite() {
                return Err(Error::InvalidProblem(format!("Dirichlet value at vertex {v} is not finite")));
            }
        }
        for (&e, &h) in &self.neumann {
            if e >= mesh.num_edges() || !mesh.is_boundary_edge(e) {
                return Err(Error::InvalidProblem(format!("Neumann edge {e} is not a boundary edge")));
            }
            if !h.is_finite() {
                return Err(Error::InvalidProblem(format!("Neumann flux on edge {e} is not finite")));
            }
        }
        Ok(())
    }

    pub fn source_values(&self, mesh: &TriangleMesh) -> Vec<f64> {
        match &self.source {
            Source::Uniform(q) => vec![*q; mesh.num_vertices()],
            Source::PerVertex(q) => q.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Dec,
    Fem,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dec => "dec",
            Method::Fem => "fem",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dec" => Ok(Method::Dec),
            "fem" => Ok(Method::Fem),
            _ => Err(Error::Config(format!("unknown method '{s}' (expected dec or fem)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: DenseVector,
}

/// `κ d₀ᵀ M₁,₁ d₀` before boundary conditions.
pub fn dec_stiffness(mesh: &TriangleMesh, metrics: &DualMetrics, kappa: f64) -> Result<SparseMatrix> {
    let d0 = derivative_0_1(mesh).to_sparse();
    let star = hodge_1_1(mesh, metrics)?;
    Ok(triple_product(&d0, &star, &d0)?.scaled(kappa))
}

/// Each Neumann edge with density `h` adds `h · |e| / 2` to both endpoints,
/// i.e. the flux through the part of the boundary owned by each dual cell.
pub fn neumann_load(mesh: &TriangleMesh, neumann: &BTreeMap<usize, f64>) -> DenseVector {
    let mut b = vec![0.0; mesh.num_vertices()];
    for (&e, &h) in neumann {
        let [i, j] = mesh.edges()[e];
        let share = 0.5 * h * mesh.edge_length(e);
        b[i] += share;
        b[j] += share;
    }
    b
}

/// `-M₀,₂ q + g`.
pub fn dec_load(mesh: &TriangleMesh, metrics: &DualMetrics, problem: &PoissonProblem) -> Result<DenseVector> {
    let star = hodge_0_2(mesh, metrics)?;
    let q = problem.source_values(mesh);
    let mut b = neumann_load(mesh, &problem.neumann);
    for (bi, mq) in b.iter_mut().zip(star.apply(&q)) {
        *bi -= mq;
    }
    Ok(b)
}

/// Symmetric elimination of prescribed values: constrained rows and columns
/// become identity, known columns move to the right-hand side.
pub fn apply_dirichlet(matrix: &SparseMatrix, rhs: &[f64], dirichlet: &BTreeMap<usize, f64>) -> LinearSystem {
    let n = matrix.rows();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (&v, &g) in dirichlet {
        fixed[v] = Some(g);
    }
    let mut b = rhs.to_vec();
    let mut triplets = Vec::with_capacity(matrix.nnz());
    for r in 0..n {
        if let Some(g) = fixed[r] {
            triplets.push((r, r, 1.0));
            b[r] = g;
            continue;
        }
        let (cols, vals) = matrix.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            match fixed[c] {
                Some(g) => b[r] -= v * g,
                None => triplets.push((r, c, v)),
            }
        }
    }
    LinearSystem {
        matrix: SparseMatrix::from_triplets(n, n, triplets),
        rhs: b,
    }
}

/// Assembles the constrained DEC system.
pub fn assemble(mesh: &TriangleMesh, metrics: &DualMetrics, problem: &PoissonProblem) -> Result<LinearSystem> {
    problem.validate(mesh)?;
    let k = dec_stiffness(mesh, metrics, problem.kappa)?;
    let b = dec_load(mesh, metrics, problem)?;
    Ok(apply_dirichlet(&k, &b, &problem.dirichlet))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearSolver {
    Cg(CgOptions),
    /// Dense LU, limited to [`crate::linalg::DENSE_LIMIT`] unknowns.
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub solver: LinearSolver,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: LinearSolver::Cg(CgOptions::default()),
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub solution: DenseVector,
    pub flux_per_triangle: Vec<[f64; 2]>,
    pub flux_magnitude_per_vertex: DenseVector,
    pub iterations: usize,
    pub residual: f64,
    pub min_solution: f64,
    pub max_solution: f64,
    pub max_flux_magnitude: f64,
    pub seconds: f64,
}

pub fn solve_problem(mesh: &TriangleMesh, problem: &PoissonProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let metrics = dual_metrics(mesh)?;
    let system = assemble(mesh, &metrics, problem)?;
    solve_system(Method::Dec, mesh, &system, problem, opts, start)
}

pub(crate) fn solve_system(
    method: Method,
    mesh: &TriangleMesh,
    system: &LinearSystem,
    problem: &PoissonProblem,
    opts: &SolveOptions,
    start: Instant,
) -> Result<SolveReport> {
    let (mut solution, iterations, residual) = match opts.solver {
        LinearSolver::Cg(cg) => {
            let out = cg_solve(&system.matrix, &system.rhs, &cg)?;
            (out.x, out.iterations, out.residual)
        }
        LinearSolver::Dense => {
            let x = dense_solve(&system.matrix, &system.rhs)?;
            let ax = system.matrix.matvec_with(&x, opts.exec);
            let bn = crate::linalg::norm2(&system.rhs);
            let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
            let res = if bn > 0.0 { crate::linalg::norm2(&r) / bn } else { 0.0 };
            (x, 0, res)
        }
    };
    for (&v, &g) in &problem.dirichlet {
        solution[v] = g;
    }
    let flux = flux_field_with(mesh, &solution, problem.kappa, opts.exec);
    let min_solution = solution.iter().copied().fold(f64::INFINITY, f64::min);
    let max_solution = solution.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_flux_magnitude = flux.per_vertex_magnitude.iter().copied().fold(0.0, f64::max);
    Ok(SolveReport {
        method,
        solution,
        flux_per_triangle: flux.per_triangle,
        flux_magnitude_per_vertex: flux.per_vertex_magnitude,
        iterations,
        residual,
        min_solution,
        max_solution,
        max_flux_magnitude,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluxField {
    /// `-κ ∇f` of the piecewise linear interpolant, per triangle.
    pub per_triangle: Vec<[f64; 2]>,
    /// Magnitude of the area-weighted average of incident triangle fluxes.
    pub per_vertex_magnitude: Vec<f64>,
}

/// Gradient of the linear interpolant of `values` over a CCW triangle.
pub fn triangle_gradient(p: [Point2; 3], values: [f64; 3]) -> [f64; 2] {
    let two_area = 2.0 * signed_area_of(p[0], p[1], p[2]);
    let mut g = [0.0, 0.0];
    for k in 0..3 {
        let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        g[0] += values[k] * (b.y - c.y);
        g[1] += values[k] * (c.x - b.x);
    }
    [g[0] / two_area, g[1] / two_area]
}

pub fn flux_field(mesh: &TriangleMesh, solution: &[f64], kappa: f64) -> FluxField {
    flux_field_with(mesh, solution, kappa, Execution::default())
}

pub fn flux_field_with(mesh: &TriangleMesh, solution: &[f64], kappa: f64, exec: Execution) -> FluxField {
    assert_eq!(solution.len(), mesh.num_vertices(), "solution length must match vertex count");
    let per_triangle = par::map_slice(mesh.triangles(), exec, |&[a, b, c]| {
        let p = [mesh.vertex(a), mesh.vertex(b), mesh.vertex(c)];
        let g = triangle_gradient(p, [solution[a], solution[b], solution[c]]);
        [-kappa * g[0], -kappa * g[1]]
    });
    let mut acc = vec![[0.0f64; 3]; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for &v in tri {
            acc[v][0] += area * per_triangle[t][0];
            acc[v][1] += area * per_triangle[t][1];
            acc[v][2] += area;
        }
    }
    let per_vertex_magnitude = acc
        .iter()
        .map(|[fx, fy, w]| (fx / w).hypot(fy / w))
        .collect();
    FluxField {
        per_triangle,
        per_vertex_magnitude,
    }
}

/// Uniform-grid point locator over the mesh triangles.
pub struct PointLocator<'a> {
    mesh: &'a TriangleMesh,
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let (mut lo, mut hi) = (mesh.vertex(0), mesh.vertex(0));
        for p in mesh.vertices() {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let side = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0);
        let cell = ((hi.x - lo.x).max(hi.y - lo.y) / side).max(f64::MIN_POSITIVE);
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let pts = tri.map(|v| mesh.vertex(v));
            let x0 = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let x1 = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let y0 = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let y1 = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, Point2::new(x0, y0));
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, Point2::new(x1, y1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        PointLocator {
            mesh,
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn cell_of(origin: Point2, cell: f64, nx: usize, ny: usize, p: Point2) -> (usize, usize) {
        let i = ((p.x - origin.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.y - origin.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    /// Lowest-index triangle containing `p` (barycentric slack `1e-12`) and
    /// the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point2) -> Option<(usize, [f64; 3])> {
        const SLACK: f64 = 1e-12;
        let (i, j) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, p);
        // a point outside the grid cannot be in a triangle, except within slack
        let margin = SLACK * self.cell * (self.nx.max(self.ny) as f64);
        if p.x < self.origin.x - margin
            || p.y < self.origin.y - margin
            || p.x > self.origin.x + self.cell * self.nx as f64 + margin
            || p.y > self.origin.y + self.cell * self.ny as f64 + margin
        {
            return None;
        }
        self.buckets[j * self.nx + i].iter().find_map(|&t| {
            let [a, b, c] = self.mesh.triangle_points(t);
            let area = signed_area_of(a, b, c);
            let l = [
                signed_area_of(p, b, c) / area,
                signed_area_of(a, p, c) / area,
                signed_area_of(a, b, p) / area,
            ];
            l.iter().all(|&x| x >= -SLACK).then_some((t, l))
        })
    }

    /// Linear interpolation of a nodal field at `p`.
    pub fn interpolate(&self, field: &[f64], p: Point2) -> Option<f64> {
        let (t, l) = self.locate(p)?;
        let [a, b, c] = self.mesh.triangles()[t];
        Some(l[0] * field[a] + l[1] * field[b] + l[2] * field[c])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSample {
    /// Fraction along the segment, in `[0, 1]`.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// `None` where the point lies outside the mesh.
    pub value: Option<f64>,
}

/// Samples a nodal field at `n` evenly spaced points from `p0` to `p1`.
/// `n == 1` samples `p0` only.
pub fn sample_line(mesh: &TriangleMesh, field: &[f64], p0: Point2, p1: Point2, n: usize) -> Vec<LineSample> {
    assert_eq!(field.len(), mesh.num_vertices(), "field length must match vertex count");
    let locator = PointLocator::new(mesh);
    (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let p = Point2::new(p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y));
            LineSample {
                t,
                x: p.x,
                y: p.y,
                value: locator.interpolate(field, p),
            }
        })
        .collect()
}

/// Convenience: metrics plus constrained system, for callers that want to
/// inspect both.
pub fn assemble_from_mesh(mesh: &TriangleMesh, problem: &PoissonProblem) -> Result<(DualMetrics, LinearSystem)> {
    let metrics = dual_metrics(mesh)?;
    let system = assemble(mesh, &metrics, problem)?;
    Ok((metrics, system))
}
