//! Discrete exterior calculus on planar triangle meshes.
//!
//! The crate builds the incidence (boundary) operators of a triangulation,
//! the signed measures of its circumcentric dual, and the diagonal Hodge
//! stars that combine them into a cotangent Laplacian. On top of that sits a
//! Poisson solver with Dirichlet and Neumann data and a linear finite-element
//! reference solver used to cross-check the discretization.
//!
//! Orientation conventions used throughout:
//!
//! * triangles are stored counterclockwise (positive signed area);
//! * every edge is stored as `[min, max]` and the edge list is sorted, so
//!   operator matrices are reproducible for a given vertex numbering;
//! * the exterior derivative on 0-forms is the transpose of `∂₁,₀`, and the
//!   dual boundary operator is `-(∂₁,₀)ᵀ`.

pub mod chains;
pub mod config;
pub mod dual;
pub mod error;
pub mod femref;
pub mod hodge;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod poisson;
pub mod study;

pub use error::{Error, Result};
pub use mesh::{Point2, TriangleMesh};
