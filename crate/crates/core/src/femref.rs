//! Linear (P1) finite elements with a lumped load vector, used as the
//! reference the DEC solver is checked against. Boundary handling, the linear
//! solver and the flux post-processing are shared with [`crate::poisson`].

use std::time::Instant;

use crate::linalg::{DenseVector, SparseMatrix};
use crate::mesh::TriangleMesh;
use crate::poisson::{
    apply_dirichlet, neumann_load, solve_system, triangle_gradient, LinearSystem, Method,
    PoissonProblem, SolveOptions, SolveReport, Source,
};
use crate::Result;

/// Element stiffness `κ · area · ∇φᵢ·∇φⱼ` for a CCW triangle.
pub fn element_stiffness(mesh: &TriangleMesh, t: usize, kappa: f64) -> [[f64; 3]; 3] {
    let p = mesh.triangle_points(t);
    let area = mesh.triangle_area(t);
    let grads = [
        triangle_gradient(p, [1.0, 0.0, 0.0]),
        triangle_gradient(p, [0.0, 1.0, 0.0]),
        triangle_gradient(p, [0.0, 0.0, 1.0]),
    ];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = kappa * area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
        }
    }
    k
}

pub fn p1_stiffness(mesh: &TriangleMesh, kappa: f64) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element_stiffness(mesh, t, kappa);
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], ke[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), triplets)
}

/// Lumped mass: each vertex gets a third of every incident triangle's area.
pub fn lumped_weights(mesh: &TriangleMesh) -> DenseVector {
    let mut w = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let third = mesh.triangle_area(t) / 3.0;
        for &v in tri {
            w[v] += third;
        }
    }
    w
}

/// `-W q + g` with lumped weights `W` and the same Neumann term as DEC.
pub fn p1_load(mesh: &TriangleMesh, source: &Source, neumann: &std::collections::BTreeMap<usize, f64>) -> DenseVector {
    let w = lumped_weights(mesh);
    let mut b = neumann_load(mesh, neumann);
    for (v, bv) in b.iter_mut().enumerate() {
        let q = match source {
            Source::Uniform(q) => *q,
            Source::PerVertex(q) => q[v],
        };
        *bv -= w[v] * q;
    }
    b
}

pub fn assemble_fem(mesh: &TriangleMesh, problem: &PoissonProblem) -> Result<LinearSystem> {
    problem.validate(mesh)?;
    let k = p1_stiffness(mesh, problem.kappa);
    let b = p1_load(mesh, &problem.source, &problem.neumann);
    Ok(apply_dirichlet(&k, &b, &problem.dirichlet))
}

pub fn solve_fem(mesh: &TriangleMesh, problem: &PoissonProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let system = assemble_fem(mesh, problem)?;
    solve_system(Method::Fem, mesh, &system, problem, opts, start)
}
