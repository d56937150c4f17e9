mod common;

use dec2d::femref::{assemble_fem, solve_fem};
use dec2d::hodge::hodge_1_1;
use dec2d::linalg::{CgOptions, SparseMatrix};
use dec2d::mesh::{gen_disk_mesh, Point2};
use dec2d::par::Execution;
use dec2d::poisson::*;
use dec2d::study::{disk_exact, disk_problem};
use proptest::prelude::*;

use common::*;

fn tight(exec: Execution) -> SolveOptions {
    SolveOptions {
        solver: LinearSolver::Cg(CgOptions { tol: 1e-13, exec, ..Default::default() }),
        exec,
    }
}

#[test]
fn coarse_disk_matches_dense_oracle() {
    let m = gen_disk_mesh(1);
    let (_, system) = assemble_from_mesh(&m, &disk_problem(&m)).unwrap();
    let oracle = dense_gauss(system.matrix.to_dense(), system.rhs.clone());
    let report = solve_problem(&m, &disk_problem(&m), &SolveOptions::default()).unwrap();
    for (a, b) in report.solution.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-9);
    }
    assert!((oracle[0] - 10.25).abs() <= 1e-12);
}

#[test]
fn dense_and_cg_agree_on_fine_disk() {
    let m = gen_disk_mesh(6);
    let p = disk_problem(&m);
    let cg = solve_problem(&m, &p, &tight(Execution::default())).unwrap();
    let lu = solve_problem(&m, &p, &SolveOptions { solver: LinearSolver::Dense, ..Default::default() }).unwrap();
    let jac = solve_problem(
        &m,
        &p,
        &SolveOptions {
            solver: LinearSolver::Cg(CgOptions { tol: 1e-13, jacobi: true, ..Default::default() }),
            ..Default::default()
        },
    )
    .unwrap();
    for v in 0..m.num_vertices() {
        assert!((cg.solution[v] - lu.solution[v]).abs() <= 1e-10);
        assert!((jac.solution[v] - lu.solution[v]).abs() <= 1e-10);
    }
}

#[test]
fn dec_is_exact_at_nodes_on_disks() {
    for rings in [2, 5, 9] {
        let m = gen_disk_mesh(rings);
        let r = solve_problem(&m, &disk_problem(&m), &tight(Execution::default())).unwrap();
        for (v, p) in m.vertices().iter().enumerate() {
            assert!((r.solution[v] - disk_exact(*p)).abs() <= 1e-10);
        }
        assert!(r.residual <= 1e-13);
    }
}

#[test]
fn neumann_flux_leaves_through_dirichlet_rim() {
    let m = holed_disk(48, 8, 0.4, 0.3, Point2::new(0.1, -0.05));
    let h = 2.5;
    let problem = PoissonProblem::new(1.3, Source::Uniform(0.0))
        .dirichlet_on_marker(&m, 1, 0.0)
        .neumann_on_marker(&m, HOLE_MARKER, h);
    let (metrics, _) = assemble_from_mesh(&m, &problem).unwrap();
    let k = dec_stiffness(&m, &metrics, problem.kappa).unwrap();
    let u = solve_problem(&m, &problem, &tight(Execution::default())).unwrap().solution;
    let ku = k.matvec(&u);
    let rim: f64 = problem.dirichlet.keys().map(|&v| ku[v]).sum();
    let perimeter: f64 = m.boundary_edges_with_marker(HOLE_MARKER).iter().map(|&e| m.edge_length(e)).sum();
    assert!((rim + h * perimeter).abs() <= 1e-9 * h * perimeter);
}

#[test]
fn source_free_methods_coincide() {
    let m = perturbed_disk(6, 0.4, 7);
    let problem = PoissonProblem::new(2.0, Source::Uniform(0.0)).dirichlet_on_boundary(&m, |p| (3.0 * p.x).sin() + p.y * p.y);
    let opts = SolveOptions::default();
    let dec = solve_problem(&m, &problem, &opts).unwrap();
    let fem = solve_fem(&m, &problem, &opts).unwrap();
    for (a, b) in dec.solution.iter().zip(&fem.solution) {
        assert!((a - b).abs() <= 1e-9);
    }
    assert_eq!(assemble_fem(&m, &problem).unwrap().rhs.len(), m.num_vertices());
}

#[test]
fn diameter_samples_follow_exact_profile() {
    let m = gen_disk_mesh(2);
    let field: Vec<f64> = m.vertices().iter().map(|p| disk_exact(*p)).collect();
    let samples = sample_line(&m, &field, Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0), 41);
    let h = m.max_edge_length();
    for s in &samples {
        let exact = 0.25 * (1.0 - s.x * s.x) + 10.0;
        let got = s.value.expect("diameter lies inside the disk");
        assert!((got - exact).abs() <= 0.5 * h * h / 8.0 + 1e-12);
        if (s.x * 2.0).fract() == 0.0 {
            // mesh nodes at x = ±1, ±0.5, 0
            assert!((got - exact).abs() <= 1e-12, "x = {}", s.x);
        }
    }
    let outside = sample_line(&m, &field, Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), 5);
    assert!(outside[0].value.is_some());
    assert!(outside[4].value.is_none());
}

#[test]
fn parallel_and_sequential_runs_are_identical() {
    let m = perturbed_disk(10, 0.3, 42);
    let problem = disk_problem(&m);
    let a = solve_problem(&m, &problem, &tight(Execution::Sequential)).unwrap();
    let b = solve_problem(&m, &problem, &tight(Execution::Parallel)).unwrap();
    assert_eq!(a.solution, b.solution);
    assert_eq!(a.flux_per_triangle, b.flux_per_triangle);
    assert_eq!(a.iterations, b.iterations);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle_on_delaunay_disks(rings in 1usize..7, seed in any::<u64>(), amp in 0.0f64..0.2) {
        let m = perturbed_disk(rings, amp, seed);
        let h = hodge_1_1(&m, &dec2d::dual::dual_metrics(&m).unwrap()).unwrap();
        prop_assume!(h.diagonal().iter().all(|&w| w >= 0.0));
        let problem = PoissonProblem::new(1.0, Source::Uniform(0.0))
            .dirichlet_on_boundary(&m, |p| (5.0 * p.x + (seed % 7) as f64).cos() * p.y.exp());
        let lo = problem.dirichlet.values().copied().fold(f64::INFINITY, f64::min);
        let hi = problem.dirichlet.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let u = solve_problem(&m, &problem, &tight(Execution::default())).unwrap().solution;
        for x in u {
            prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9);
        }
    }

    #[test]
    fn constrained_system_stays_symmetric(rings in 1usize..6, seed in any::<u64>()) {
        let m = perturbed_disk(rings, 0.4, seed);
        let (_, s) = assemble_from_mesh(&m, &disk_problem(&m)).unwrap();
        prop_assert_eq!(s.matrix.asymmetry(), 0.0);
        let mm = SparseMatrix::from_matrix_market(&s.matrix.to_matrix_market()).unwrap();
        prop_assert_eq!(mm, s.matrix);
    }
}
