use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("triangle {triangle} is degenerate (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("mesh has {0} edge-connected components; exactly one is required")]
    MultipleComponents(usize),

    #[error("edge {edge} is not an edge of triangle {triangle}")]
    EdgeNotInTriangle { triangle: usize, edge: usize },

    #[error("dual cell of vertex {0} has zero area")]
    ZeroDualArea(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("conjugate gradient breakdown at iteration {iteration}: pᵀAp = {curvature:e} (system is not positive definite)")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular matrix in dense solve (pivot column {0})")]
    Singular(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
