//! Planar triangle meshes: loading, validation, orientation and the derived
//! edge/boundary tables every operator is built from.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Boundary marker the structured disk generator puts on its outer ring.
pub const DISK_OUTER_MARKER: i32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    /// z-component of the 2D cross product (the wedge `self ∧ o`).
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Half the determinant of `[b - a, c - a]`; positive iff `a, b, c` is
/// counterclockwise.
pub fn signed_area_of(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

/// A validated, counterclockwise-oriented, edge-connected triangle mesh.
///
/// Local edge `k` of a triangle `[a, b, c]` is the edge opposite vertex `k`,
/// traversed in counterclockwise order: `k = 0` is `b → c`, `k = 1` is
/// `c → a`, `k = 2` is `a → b`. The sign stored next to each local edge is
/// `+1` when that traversal runs from the lower to the higher vertex index
/// (the canonical direction of the edge).
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Point2>,
    markers: Vec<i32>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_of_triangle: Vec<[(usize, i8); 3]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    boundary_edges: Vec<usize>,
    boundary_vertices: Vec<usize>,
    is_boundary_vertex: Vec<bool>,
    reoriented: Vec<usize>,
}

impl PartialEq for TriangleMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.markers == other.markers
            && self.triangles == other.triangles
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let markers = vec![0; vertices.len()];
        Self::with_markers(vertices, markers, triangles)
    }

    /// Builds and validates a mesh. Clockwise triangles are flipped to
    /// counterclockwise (their indices are listed by [`reoriented_triangles`]).
    ///
    /// [`reoriented_triangles`]: TriangleMesh::reoriented_triangles
    pub fn with_markers(
        vertices: Vec<Point2>,
        markers: Vec<i32>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if markers.len() != nv {
            return Err(Error::InvalidMesh(format!(
                "{} markers for {} vertices",
                markers.len(),
                nv
            )));
        }
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "vertex {i} has a non-finite coordinate"
            )));
        }
        for tri in &triangles {
            for &v in tri {
                if v >= nv {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        count: nv,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {:?} repeats a vertex",
                    tri
                )));
            }
        }

        let diag2 = bbox_diagonal(&vertices).powi(2);
        let mut reoriented = Vec::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            let area = signed_area_of(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area.abs() <= 1e-14 * diag2 {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
            if area < 0.0 {
                tri.swap(1, 2);
                reoriented.push(t);
            }
        }

        let mut used = vec![false; nv];
        for tri in &triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not used by any triangle"
            )));
        }

        // (min, max, triangle, local edge, direction sign)
        let mut half_edges: Vec<(usize, usize, usize, usize, i8)> =
            Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let from = tri[(k + 1) % 3];
                let to = tri[(k + 2) % 3];
                let sign = if from < to { 1 } else { -1 };
                half_edges.push((from.min(to), from.max(to), t, k, sign));
            }
        }
        half_edges.sort_unstable();

        let mut edges = Vec::new();
        let mut edge_triangles: Vec<(usize, Option<usize>)> = Vec::new();
        let mut edge_of_triangle = vec![[(0usize, 0i8); 3]; triangles.len()];
        let mut i = 0;
        while i < half_edges.len() {
            let (a, b, t0, _, s0) = half_edges[i];
            let mut j = i + 1;
            while j < half_edges.len() && half_edges[j].0 == a && half_edges[j].1 == b {
                j += 1;
            }
            let e = edges.len();
            match j - i {
                1 => edge_triangles.push((t0, None)),
                2 => {
                    let (_, _, t1, _, s1) = half_edges[i + 1];
                    if s0 == s1 {
                        return Err(Error::InvalidMesh(format!(
                            "triangles {t0} and {t1} overlap along edge ({a}, {b})"
                        )));
                    }
                    edge_triangles.push((t0, Some(t1)));
                }
                _ => return Err(Error::NonManifoldEdge(a, b)),
            }
            for &(_, _, t, k, s) in &half_edges[i..j] {
                edge_of_triangle[t][k] = (e, s);
            }
            edges.push([a, b]);
            i = j;
        }

        let components = count_components(triangles.len(), &edge_triangles);
        if components != 1 {
            return Err(Error::MultipleComponents(components));
        }

        let boundary_edges: Vec<usize> = edge_triangles
            .iter()
            .enumerate()
            .filter(|(_, (_, other))| other.is_none())
            .map(|(e, _)| e)
            .collect();
        let mut is_boundary_vertex = vec![false; nv];
        for &e in &boundary_edges {
            is_boundary_vertex[edges[e][0]] = true;
            is_boundary_vertex[edges[e][1]] = true;
        }
        let boundary_vertices = (0..nv).filter(|&v| is_boundary_vertex[v]).collect();

        Ok(TriangleMesh {
            vertices,
            markers,
            triangles,
            edges,
            edge_of_triangle,
            edge_triangles,
            boundary_edges,
            boundary_vertices,
            is_boundary_vertex,
            reoriented,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point2 {
        self.vertices[v]
    }

    pub fn markers(&self) -> &[i32] {
        &self.markers
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Canonical `[min, max]` edges, sorted lexicographically.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per triangle, `(edge index, sign)` of the edge opposite each corner.
    pub fn edge_of_triangle(&self) -> &[[(usize, i8); 3]] {
        &self.edge_of_triangle
    }

    /// Triangles on each side of an edge; the second is `None` on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].1.is_none()
    }

    /// Triangles that were given clockwise and flipped during construction.
    pub fn reoriented_triangles(&self) -> &[usize] {
        &self.reoriented
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search(&key).ok()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        self.vertices[a].dist(self.vertices[b])
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area_of(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.num_edges())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// `V - E + F`; 1 for a disk, 0 for an annulus.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn vertices_with_marker(&self, marker: i32) -> Vec<usize> {
        (0..self.num_vertices())
            .filter(|&v| self.markers[v] == marker)
            .collect()
    }

    /// Boundary edges whose two endpoints both carry `marker`.
    pub fn boundary_edges_with_marker(&self, marker: i32) -> Vec<usize> {
        self.boundary_edges
            .iter()
            .copied()
            .filter(|&e| {
                let [a, b] = self.edges[e];
                self.markers[a] == marker && self.markers[b] == marker
            })
            .collect()
    }

    /// Boundary edges chained into closed loops, each listed as a vertex
    /// sequence that follows the counterclockwise triangle orientation.
    /// Returns `None` if the boundary does not decompose into simple loops.
    pub fn boundary_loops(&self) -> Option<Vec<Vec<usize>>> {
        let nv = self.num_vertices();
        let mut next = vec![usize::MAX; nv];
        for &e in &self.boundary_edges {
            let (t, _) = self.edge_triangles[e];
            let tri = self.triangles[t];
            let k = (0..3).find(|&k| self.edge_of_triangle[t][k].0 == e)?;
            let from = tri[(k + 1) % 3];
            let to = tri[(k + 2) % 3];
            if next[from] != usize::MAX {
                return None;
            }
            next[from] = to;
        }
        let mut seen = vec![false; nv];
        let mut loops = Vec::new();
        for &start in &self.boundary_vertices {
            if seen[start] {
                continue;
            }
            let mut lp = Vec::new();
            let mut v = start;
            loop {
                if seen[v] || next[v] == usize::MAX {
                    return None;
                }
                seen[v] = true;
                lp.push(v);
                v = next[v];
                if v == start {
                    break;
                }
            }
            loops.push(lp);
        }
        Some(loops)
    }
}

fn bbox_diagonal(points: &[Point2]) -> f64 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    if points.is_empty() {
        0.0
    } else {
        hi.dist(lo)
    }
}

fn count_components(num_triangles: usize, edge_triangles: &[(usize, Option<usize>)]) -> usize {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..num_triangles).collect();
    for &(a, b) in edge_triangles {
        if let Some(b) = b {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    (0..num_triangles).filter(|&t| find(&mut parent, t) == t).count()
}

/// Signed area of a mesh triangle given by vertex indices.
pub fn signed_area(tri: [usize; 3], mesh: &TriangleMesh) -> f64 {
    let v = mesh.vertices();
    signed_area_of(v[tri[0]], v[tri[1]], v[tri[2]])
}

/// Structured mesh of the unit disk: a center vertex plus `rings` rings, ring
/// `k` holding `8k` evenly spaced vertices at radius `k / rings`. Outer-ring
/// vertices carry [`DISK_OUTER_MARKER`].
///
/// # Panics
/// If `rings == 0`.
pub fn gen_disk_mesh(rings: usize) -> TriangleMesh {
    assert!(rings >= 1, "disk mesh needs at least one ring");
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 4 * k * (k - 1) };
    let ring_len = |k: usize| if k == 0 { 1 } else { 8 * k };

    let mut vertices = vec![Point2::new(0.0, 0.0)];
    let mut markers = vec![0];
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        let n = ring_len(k);
        for j in 0..n {
            let theta = 2.0 * PI * j as f64 / n as f64;
            vertices.push(Point2::new(r * theta.cos(), r * theta.sin()));
            markers.push(if k == rings { DISK_OUTER_MARKER } else { 0 });
        }
    }

    let mut triangles = Vec::with_capacity(8 * rings * rings);
    for j in 0..8 {
        triangles.push([0, 1 + j, 1 + (j + 1) % 8]);
    }
    for k in 2..=rings {
        let (n_in, n_out) = (ring_len(k - 1), ring_len(k));
        let inner = |i: usize| ring_start(k - 1) + i % n_in;
        let outer = |j: usize| ring_start(k) + j % n_out;
        let (mut i, mut j) = (0, 0);
        while i < n_in || j < n_out {
            // compare angles (i+1)/n_in and (j+1)/n_out without rounding
            let lhs = (i + 1) * n_out;
            let rhs = (j + 1) * n_in;
            let advance_outer = if i == n_in {
                true
            } else if j == n_out {
                false
            } else if lhs != rhs {
                rhs < lhs
            } else {
                // tie: split the quad along its shorter diagonal
                let d_outer = vertices[inner(i)].dist(vertices[outer(j + 1)]);
                let d_inner = vertices[outer(j)].dist(vertices[inner(i + 1)]);
                d_outer <= d_inner
            };
            if advance_outer {
                triangles.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
            } else {
                triangles.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }

    TriangleMesh::with_markers(vertices, markers, triangles)
        .expect("structured disk mesh is valid by construction")
}

// ---------------------------------------------------------------------------
// Triangle .node / .ele text format

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
}

fn data_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in content.char_indices() {
            let sep = ch.is_whitespace() || ch == ',';
            match (sep, start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((s + 1, &content[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

fn parse_err(file: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        column,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(file: &str, line: &Line, idx: usize, what: &str) -> Result<T> {
    let Some(&(col, tok)) = line.tokens.get(idx) else {
        let col = line
            .tokens
            .last()
            .map(|(c, t)| c + t.len())
            .unwrap_or(1);
        return Err(parse_err(file, line.number, col, format!("missing {what}")));
    };
    tok.parse::<T>()
        .map_err(|_| parse_err(file, line.number, col, format!("invalid {what} '{tok}'")))
}

/// Parses Triangle-style `.node` and `.ele` texts into a validated mesh.
///
/// Node numbering may start at 0 or 1 (detected from the first node row);
/// the `.ele` vertex references use the same base. Boundary markers are read
/// when the `.node` header announces them.
pub fn load_mesh(node_text: &str, ele_text: &str) -> Result<TriangleMesh> {
    const NODE: &str = "node";
    const ELE: &str = "ele";

    let mut lines = data_lines(node_text);
    let header = lines
        .next()
        .ok_or_else(|| parse_err(NODE, 1, 1, "missing header"))?;
    let n: usize = field(NODE, &header, 0, "node count")?;
    let dim: usize = field(NODE, &header, 1, "dimension")?;
    if dim != 2 {
        return Err(parse_err(NODE, header.number, header.tokens[1].0, "dimension must be 2"));
    }
    let nattr: usize = if header.tokens.len() > 2 { field(NODE, &header, 2, "attribute count")? } else { 0 };
    let nmark: usize = if header.tokens.len() > 3 { field(NODE, &header, 3, "marker count")? } else { 0 };
    if nmark > 1 {
        return Err(parse_err(NODE, header.number, header.tokens[3].0, "marker count must be 0 or 1"));
    }

    let mut base = 0;
    let mut vertices = Vec::with_capacity(n);
    let mut markers = Vec::with_capacity(n);
    let mut last_line = header.number;
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| parse_err(NODE, last_line + 1, 1, format!("expected {n} nodes, found {i}")))?;
        last_line = line.number;
        let idx: usize = field(NODE, &line, 0, "node index")?;
        if i == 0 {
            if idx > 1 {
                return Err(parse_err(NODE, line.number, line.tokens[0].0, "first node index must be 0 or 1"));
            }
            base = idx;
        } else if idx != base + i {
            return Err(parse_err(NODE, line.number, line.tokens[0].0, format!("expected node index {}", base + i)));
        }
        let x: f64 = field(NODE, &line, 1, "x coordinate")?;
        let y: f64 = field(NODE, &line, 2, "y coordinate")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(NODE, line.number, line.tokens[1].0, "non-finite coordinate"));
        }
        let marker: i32 = if nmark == 1 { field(NODE, &line, 3 + nattr, "boundary marker")? } else { 0 };
        vertices.push(Point2::new(x, y));
        markers.push(marker);
    }

    let mut lines = data_lines(ele_text);
    let header = lines
        .next()
        .ok_or_else(|| parse_err(ELE, 1, 1, "missing header"))?;
    let nt: usize = field(ELE, &header, 0, "triangle count")?;
    let per: usize = if header.tokens.len() > 1 { field(ELE, &header, 1, "nodes per triangle")? } else { 3 };
    if per != 3 {
        return Err(parse_err(ELE, header.number, header.tokens[1].0, "only 3-node triangles are supported"));
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut ele_base = 0;
    let mut last_line = header.number;
    for t in 0..nt {
        let line = lines
            .next()
            .ok_or_else(|| parse_err(ELE, last_line + 1, 1, format!("expected {nt} triangles, found {t}")))?;
        last_line = line.number;
        let idx: usize = field(ELE, &line, 0, "triangle index")?;
        if t == 0 {
            if idx > 1 {
                return Err(parse_err(ELE, line.number, line.tokens[0].0, "first triangle index must be 0 or 1"));
            }
            ele_base = idx;
        } else if idx != ele_base + t {
            return Err(parse_err(ELE, line.number, line.tokens[0].0, format!("expected triangle index {}", ele_base + t)));
        }
        let mut tri = [0usize; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let v: usize = field(ELE, &line, 1 + k, "vertex index")?;
            if v < base || v - base >= n {
                return Err(Error::IndexOutOfRange { index: v, count: n });
            }
            *slot = v - base;
        }
        triangles.push(tri);
    }

    TriangleMesh::with_markers(vertices, markers, triangles)
}

/// Serializes a mesh to `.node` and `.ele` texts (0-based, 17 significant
/// digits, one boundary marker column).
pub fn save_mesh(mesh: &TriangleMesh) -> (String, String) {
    let mut node = String::new();
    let _ = writeln!(node, "{} 2 0 1", mesh.num_vertices());
    for (i, (p, m)) in mesh.vertices().iter().zip(mesh.markers()).enumerate() {
        let _ = writeln!(node, "{i} {:.16e} {:.16e} {m}", p.x, p.y);
    }
    let mut ele = String::new();
    let _ = writeln!(ele, "{} 3 0", mesh.num_triangles());
    for (t, [a, b, c]) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(ele, "{t} {a} {b} {c}");
    }
    (node, ele)
}
