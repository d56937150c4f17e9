//! Plain-text problem configuration.
//!
//! ```text
//! # comments start with '#'
//! kappa = 80.2
//! source = 20.2            # or a path to a per-vertex CSV
//! dirichlet = outer:10     # marker:value pairs, comma separated
//! neumann = 2:100
//! ```
//!
//! Markers refer to the boundary markers of the `.node` file; `outer` is an
//! alias for marker 1, which the disk generator uses for its rim.

use std::path::{Path, PathBuf};

use crate::io::read_text;
use crate::mesh::{TriangleMesh, DISK_OUTER_MARKER};
use crate::poisson::{PoissonProblem, Source};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    Constant(f64),
    /// CSV with one value per vertex (`value` or `vertex,value` rows).
    File(PathBuf),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemConfig {
    pub kappa: Option<f64>,
    pub source: Option<SourceSpec>,
    pub dirichlet: Vec<(i32, f64)>,
    pub neumann: Vec<(i32, f64)>,
}

pub fn parse_marker(token: &str) -> Result<i32> {
    let t = token.trim();
    if t.eq_ignore_ascii_case("outer") {
        return Ok(DISK_OUTER_MARKER);
    }
    t.parse()
        .map_err(|_| Error::Config(format!("invalid boundary marker '{t}'")))
}

/// Parses `marker:value[, marker:value ...]`.
pub fn parse_marker_values(text: &str) -> Result<Vec<(i32, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (m, v) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("expected marker:value, got '{pair}'")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid value in '{pair}'")))?;
            if !value.is_finite() {
                return Err(Error::Config(format!("non-finite value in '{pair}'")));
            }
            Ok((parse_marker(m)?, value))
        })
        .collect()
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: '{value}' is not a finite number")))
}

impl ProblemConfig {
    /// Parses config text; relative source paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ProblemConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            match key.as_str() {
                "kappa" => cfg.kappa = Some(parse_number("kappa", value)?),
                "source" => {
                    cfg.source = Some(match value.parse::<f64>() {
                        Ok(q) if q.is_finite() => SourceSpec::Constant(q),
                        _ => SourceSpec::File(base_dir.join(value)),
                    })
                }
                "dirichlet" => cfg.dirichlet.extend(parse_marker_values(value)?),
                "neumann" => cfg.neumann.extend(parse_marker_values(value)?),
                other => {
                    return Err(Error::Config(format!("line {}: unknown key '{other}'", i + 1)))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path).map_err(|e| Error::Config(e.to_string()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Resolves markers against `mesh`. Missing `kappa` defaults to 1 and a
    /// missing source to 0.
    pub fn build(&self, mesh: &TriangleMesh) -> Result<PoissonProblem> {
        let kappa = self.kappa.unwrap_or(1.0);
        if !(kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        let source = match &self.source {
            None => Source::Uniform(0.0),
            Some(SourceSpec::Constant(q)) => Source::Uniform(*q),
            Some(SourceSpec::File(path)) => {
                let text = read_text(path).map_err(|e| Error::Config(e.to_string()))?;
                Source::PerVertex(parse_source_csv(&text, mesh.num_vertices())?)
            }
        };
        let mut problem = PoissonProblem::new(kappa, source);
        for &(marker, value) in &self.dirichlet {
            if mesh.vertices_with_marker(marker).is_empty() {
                return Err(Error::Config(format!("Dirichlet marker {marker} matches no vertex")));
            }
            problem = problem.dirichlet_on_marker(mesh, marker, value);
        }
        for &(marker, h) in &self.neumann {
            if mesh.boundary_edges_with_marker(marker).is_empty() {
                return Err(Error::Config(format!("Neumann marker {marker} matches no boundary edge")));
            }
            problem = problem.neumann_on_marker(mesh, marker, h);
        }
        Ok(problem)
    }
}

/// Per-vertex source values: either one `value` per line in vertex order or
/// `vertex,value` rows. A non-numeric first line is treated as a header.
pub fn parse_source_csv(text: &str, num_vertices: usize) -> Result<Vec<f64>> {
    let mut values = vec![None; num_vertices];
    let mut sequential = 0usize;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<(usize, f64)> = match fields[..] {
            [v] => v.parse().ok().map(|v| (sequential, v)),
            [idx, v] => idx.parse().ok().zip(v.parse().ok()),
            _ => None,
        };
        let Some((idx, v)) = parsed else {
            if i == 0 {
                continue;
            }
            return Err(Error::Config(format!("source CSV line {}: cannot parse '{line}'", i + 1)));
        };
        if idx >= num_vertices {
            return Err(Error::Config(format!("source CSV line {}: vertex {idx} out of range", i + 1)));
        }
        values[idx] = Some(v);
        sequential += 1;
    }
    values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| Error::Config(format!("source CSV has no value for vertex {v}"))))
        .collect()
}
