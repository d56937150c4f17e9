#![allow(dead_code)]

use std::f64::consts::PI;

use dec2d::mesh::{gen_disk_mesh, signed_area_of, Point2, TriangleMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HOLE_MARKER: i32 = 2;

/// Regular hexagon v0..v5 around a center v6, with the face and edge
/// orderings used in the worked example of the operators.
pub fn hexagon() -> (Vec<Point2>, Vec<[usize; 3]>, Vec<[usize; 2]>) {
    let mut v: Vec<Point2> = (0..6)
        .map(|k| {
            let a = PI / 3.0 * k as f64;
            Point2::new(a.cos(), a.sin())
        })
        .collect();
    v.push(Point2::new(0.0, 0.0));
    let faces = (0..6).map(|k| [k, (k + 1) % 6, 6]).collect();
    let mut edges: Vec<[usize; 2]> = (0..6).map(|k| [k, 6]).collect();
    edges.extend((0..6).map(|k| [k, (k + 1) % 6]));
    (v, faces, edges)
}

pub fn hexagon_mesh() -> TriangleMesh {
    let (v, f, _) = hexagon();
    TriangleMesh::new(v, f).unwrap()
}

/// Structured disk with interior vertices moved by up to `amplitude` times
/// the ring spacing. The amplitude is halved until no triangle inverts.
pub fn perturbed_disk(rings: usize, amplitude: f64, seed: u64) -> TriangleMesh {
    let base = gen_disk_mesh(rings);
    let h = 1.0 / rings as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<(f64, f64)> = (0..base.num_vertices())
        .map(|_| (rng.gen::<f64>(), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let mut amp = amplitude;
    loop {
        let vertices: Vec<Point2> = base
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, p)| {
                if base.is_boundary_vertex(v) {
                    return *p;
                }
                let (r, a) = offsets[v];
                let r = amp * h * r.sqrt();
                Point2::new(p.x + r * a.cos(), p.y + r * a.sin())
            })
            .collect();
        let min_area = base
            .triangles()
            .iter()
            .map(|t| signed_area_of(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .fold(f64::INFINITY, f64::min);
        if min_area > 1e-3 * h * h {
            return TriangleMesh::with_markers(vertices, base.markers().to_vec(), base.triangles().to_vec()).unwrap();
        }
        amp *= 0.5;
    }
}

/// 50 perturbed disks of 2..=6 rings with jitter up to 0.45 ring spacings.
pub fn random_disks() -> Vec<TriangleMesh> {
    (0..50u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let rings = rng.gen_range(2..=6);
            perturbed_disk(rings, 0.45, seed)
        })
        .collect()
}

/// Unit disk minus an ellipse with semi-axes `(a, b)` centred at `center`.
/// `n_theta` vertices per ring, `n_rad` layers between the two boundaries.
/// Outer vertices carry marker 1, hole vertices [`HOLE_MARKER`].
pub fn holed_disk(n_theta: usize, n_rad: usize, a: f64, b: f64, center: Point2) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut markers = Vec::new();
    for j in 0..=n_rad {
        let s = j as f64 / n_rad as f64;
        for i in 0..n_theta {
            let t = 2.0 * PI * i as f64 / n_theta as f64;
            let inner = Point2::new(center.x + a * t.cos(), center.y + b * t.sin());
            let outer = Point2::new(t.cos(), t.sin());
            vertices.push(Point2::new(
                (1.0 - s) * inner.x + s * outer.x,
                (1.0 - s) * inner.y + s * outer.y,
            ));
            markers.push(if j == 0 {
                HOLE_MARKER
            } else if j == n_rad {
                1
            } else {
                0
            });
        }
    }
    let id = |j: usize, i: usize| j * n_theta + i % n_theta;
    let mut triangles = Vec::new();
    for j in 0..n_rad {
        for i in 0..n_theta {
            let (p00, p01, p10, p11) = (id(j, i), id(j, i + 1), id(j + 1, i), id(j + 1, i + 1));
            if vertices[p00].dist(vertices[p11]) <= vertices[p01].dist(vertices[p10]) {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            } else {
                triangles.push([p00, p10, p01]);
                triangles.push([p01, p10, p11]);
            }
        }
    }
    TriangleMesh::with_markers(vertices, markers, triangles).unwrap()
}

/// `½ Σ cot(opposite angle)` per edge, from angles measured with `atan2`.
pub fn cot_weights(mesh: &TriangleMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_edges()];
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (o, a, b) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (po, pa, pb) = (mesh.vertex(o), mesh.vertex(a), mesh.vertex(b));
            let (u, v) = ((pa.x - po.x, pa.y - po.y), (pb.x - po.x, pb.y - po.y));
            let angle = (u.0 * v.1 - u.1 * v.0).atan2(u.0 * v.0 + u.1 * v.1);
            let e = mesh.edge_index(a, b).unwrap();
            w[e] += 0.5 * angle.cos() / angle.sin();
        }
    }
    w
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
