use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dec2d::chains::derivative_0_1;
use dec2d::config::{parse_marker_values, ProblemConfig, SourceSpec};
use dec2d::dual::dual_metrics;
use dec2d::femref::assemble_fem;
use dec2d::hodge::hodge_1_1;
use dec2d::io;
use dec2d::linalg::CgOptions;
use dec2d::mesh::{gen_disk_mesh, Point2, TriangleMesh};
use dec2d::par::{threads_from_env, Execution};
use dec2d::poisson::{assemble_from_mesh, sample_line, LinearSolver, Method, SolveOptions, SolveReport};
use dec2d::study::{compare_csv, compare_disk, compare_text, convergence_csv, convergence_disk, solve_with};
use dec2d::Error;

#[derive(Parser)]
#[command(name = "dec2d", version, about = "2D discrete exterior calculus Poisson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the structured unit-disk mesh as .node/.ele files
    GenDisk {
        #[arg(long)]
        rings: usize,
        /// Output prefix; `.node` and `.ele` are appended
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve κΔu = q on a mesh and write fields and a report
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value = "dec")]
        method: MethodArg,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the constrained system matrix in MatrixMarket format
        #[arg(long)]
        matrix: bool,
    },
    /// Disk benchmark table (κ=1, q=-1, u=10 on the rim) over ring counts
    Compare {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        rings: Vec<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV output file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the circumcentric dual mesh and Hodge star
    Dual {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Error norms and observed orders against the exact disk solution
    Convergence {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        rings: Vec<usize>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the solution along a segment
    Sample {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value = "dec")]
        method: MethodArg,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: Point2,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: Point2,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshArgs {
    /// Prefix of `<prefix>.node` / `<prefix>.ele`
    #[arg(long, conflicts_with_all = ["node", "ele", "gen_disk"])]
    mesh: Option<PathBuf>,
    #[arg(long, requires = "ele")]
    node: Option<PathBuf>,
    #[arg(long, requires = "node")]
    ele: Option<PathBuf>,
    /// Use the structured disk with this many rings
    #[arg(long, conflicts_with_all = ["node", "ele"])]
    gen_disk: Option<usize>,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file with kappa/source/dirichlet/neumann keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Constant source or a per-vertex CSV path
    #[arg(long, allow_hyphen_values = true)]
    source: Option<String>,
    /// marker:value, repeatable; `outer` is marker 1
    #[arg(long)]
    dirichlet: Vec<String>,
    /// marker:flux density, repeatable
    #[arg(long)]
    neumann: Vec<String>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "cg")]
    solver: SolverKind,
    /// Relative residual target (default 1e-10; 1e-13 for convergence)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Jacobi preconditioning for CG
    #[arg(long)]
    jacobi: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Cg,
    Dense,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Dec,
    Fem,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Dec => vec![Method::Dec],
            MethodArg::Fem => vec![Method::Fem],
            MethodArg::Both => vec![Method::Dec, Method::Fem],
        }
    }
}

/// Exit 2 for bad input or configuration, 1 for failures while running.
enum Failure {
    Config(String),
    Pipeline(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Pipeline(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_point(s: &str) -> std::result::Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok(Point2::new(parse(x)?, parse(y)?))
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Config(format!("file not found: {}", path.display())))
    }
}

fn load_mesh(args: &MeshArgs) -> CliResult<TriangleMesh> {
    let (node, ele) = match (&args.mesh, &args.node, &args.ele, args.gen_disk) {
        (_, _, _, Some(0)) => return Err(Failure::Config("--gen-disk needs at least 1 ring".into())),
        (_, _, _, Some(rings)) => return Ok(gen_disk_mesh(rings)),
        (Some(prefix), _, _, _) => io::mesh_paths(prefix),
        (None, Some(n), Some(e), _) => (n.clone(), e.clone()),
        _ => return Err(Failure::Config("give --mesh, --node/--ele or --gen-disk".into())),
    };
    require_file(&node)?;
    require_file(&ele)?;
    Ok(io::read_mesh(&node, &ele)?)
}

fn load_problem(args: &ProblemArgs, mesh: &TriangleMesh) -> CliResult<dec2d::poisson::PoissonProblem> {
    let mut cfg = match &args.config {
        Some(path) => {
            require_file(path)?;
            ProblemConfig::load(path)?
        }
        None => ProblemConfig::default(),
    };
    if args.kappa.is_some() {
        cfg.kappa = args.kappa;
    }
    if let Some(src) = &args.source {
        cfg.source = Some(match src.parse::<f64>() {
            Ok(q) if q.is_finite() => SourceSpec::Constant(q),
            _ => {
                let path = PathBuf::from(src);
                require_file(&path)?;
                SourceSpec::File(path)
            }
        });
    }
    if !args.dirichlet.is_empty() {
        cfg.dirichlet = args.dirichlet.iter().map(|s| parse_marker_values(s)).collect::<Result<Vec<_>, _>>()?.concat();
    }
    if !args.neumann.is_empty() {
        cfg.neumann = args.neumann.iter().map(|s| parse_marker_values(s)).collect::<Result<Vec<_>, _>>()?.concat();
    }
    if cfg.dirichlet.is_empty() {
        return Err(Failure::Config("at least one Dirichlet marker is required".into()));
    }
    Ok(cfg.build(mesh)?)
}

fn solve_options(args: &SolverArgs, default_tol: f64) -> CliResult<SolveOptions> {
    let tol = args.tol.unwrap_or(default_tol);
    if !(tol > 0.0) {
        return Err(Failure::Config(format!("--tol must be positive, got {tol}")));
    }
    if args.max_iter == Some(0) {
        return Err(Failure::Config("--max-iter must be positive".into()));
    }
    let exec = Execution::default();
    let solver = match args.solver {
        SolverKind::Cg => LinearSolver::Cg(CgOptions {
            tol,
            max_iter: args.max_iter,
            jacobi: args.jacobi,
            exec,
        }),
        SolverKind::Dense => LinearSolver::Dense,
    };
    Ok(SolveOptions { solver, exec })
}

fn check_rings(rings: &[usize]) -> CliResult<()> {
    if rings.is_empty() {
        return Err(Failure::Config("--rings needs at least one ring count".into()));
    }
    if rings.contains(&0) {
        return Err(Failure::Config("ring counts must be at least 1".into()));
    }
    Ok(())
}

/// Six significant digits.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = 5 - x.abs().log10().floor() as i32;
    if (0..=12).contains(&decimals) {
        format!("{x:.*}", decimals as usize)
    } else {
        format!("{x:.5e}")
    }
}

fn summary_line(r: &SolveReport) -> String {
    format!(
        "{}: max_u={} min_u={} max_flux={} iterations={} residual={:.3e} time={}s",
        r.method,
        sig6(r.max_solution),
        sig6(r.min_solution),
        sig6(r.max_flux_magnitude),
        r.iterations,
        r.residual,
        sig6(r.seconds)
    )
}

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => Ok(io::write_text(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenDisk { rings, out } => {
            check_rings(&[rings])?;
            let mesh = gen_disk_mesh(rings);
            io::write_mesh(&mesh, &out)?;
            let (node, ele) = io::mesh_paths(&out);
            println!(
                "wrote {} and {} ({} nodes, {} elements)",
                node.display(),
                ele.display(),
                mesh.num_vertices(),
                mesh.num_triangles()
            );
        }
        Command::Solve { mesh, problem, solver, method, out, matrix } => {
            let mesh = load_mesh(&mesh)?;
            let problem = load_problem(&problem, &mesh)?;
            let opts = solve_options(&solver, 1e-10)?;
            let mut report = format!(
                "nodes={} elements={} kappa={} dirichlet_vertices={} neumann_edges={}\n",
                mesh.num_vertices(),
                mesh.num_triangles(),
                sig6(problem.kappa),
                problem.dirichlet.len(),
                problem.neumann.len()
            );
            for m in method.methods() {
                let r = solve_with(m, &mesh, &problem, &opts)?;
                let line = summary_line(&r);
                println!("{line}");
                let _ = writeln!(report, "{line}");
                io::write_text(&out.join(format!("{m}.csv")), &io::solution_csv(&mesh, &r))?;
                io::write_text(&out.join(format!("{m}.vtk")), &io::solution_vtk(&mesh, &r, &format!("{m} solution")))?;
                if matrix {
                    let system = match m {
                        Method::Dec => assemble_from_mesh(&mesh, &problem)?.1,
                        Method::Fem => assemble_fem(&mesh, &problem)?,
                    };
                    io::write_text(&out.join(format!("{m}_system.mtx")), &system.matrix.to_matrix_market())?;
                }
            }
            io::write_text(&out.join("report.txt"), &report)?;
        }
        Command::Compare { rings, solver, out } => {
            check_rings(&rings)?;
            let opts = solve_options(&solver, 1e-10)?;
            let rows = compare_disk(&rings, &opts, opts.exec)?;
            print!("{}", compare_text(&rows));
            if let Some(path) = out {
                io::write_text(&path, &compare_csv(&rows))?;
            }
        }
        Command::Dual { mesh, out } => {
            let mesh = load_mesh(&mesh)?;
            let metrics = dual_metrics(&mesh)?;
            io::write_text(&out.join("dual.vtk"), &io::dual_vtk(&mesh, &metrics))?;
            io::write_text(&out.join("dual_edges.csv"), &io::dual_edges_csv(&mesh, &metrics))?;
            io::write_text(&out.join("dual_vertices.csv"), &io::dual_vertices_csv(&metrics))?;
            io::write_text(&out.join("dual_cells.csv"), &io::dual_cells_csv(&mesh, &metrics))?;
            io::write_text(&out.join("hodge_1_1.csv"), &hodge_1_1(&mesh, &metrics)?.to_csv())?;
            io::write_text(&out.join("d0.mtx"), &derivative_0_1(&mesh).to_matrix_market())?;
            println!(
                "dual: {} vertices, {} edges, {} cells -> {}",
                metrics.circumcenters.len(),
                mesh.num_edges(),
                mesh.num_vertices(),
                out.display()
            );
        }
        Command::Convergence { rings, method, solver, out } => {
            check_rings(&rings)?;
            let opts = solve_options(&solver, 1e-13)?;
            let mut rows = Vec::new();
            for m in method.methods() {
                rows.extend(convergence_disk(m, &rings, &opts, opts.exec)?);
            }
            write_or_print(out.as_deref(), &convergence_csv(&rows))?;
        }
        Command::Sample { mesh, problem, solver, method, from, to, n, out } => {
            if n < 2 {
                return Err(Failure::Config("--n must be at least 2".into()));
            }
            if method == MethodArg::Both {
                return Err(Failure::Config("sample takes a single method".into()));
            }
            let mesh = load_mesh(&mesh)?;
            let problem = load_problem(&problem, &mesh)?;
            let opts = solve_options(&solver, 1e-10)?;
            let r = solve_with(method.methods()[0], &mesh, &problem, &opts)?;
            let mut csv = String::from("t,x,y,u\n");
            for s in sample_line(&mesh, &r.solution, from, to, n) {
                let value = s.value.map_or(String::new(), |v| format!("{v:.16e}"));
                let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{value}", s.t, s.x, s.y);
            }
            write_or_print(out.as_deref(), &csv)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = threads_from_env();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("warning: could not size thread pool: {e}");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
