//! Small sparse linear algebra kernel: CSR storage, mat-vec, `AᵀDB`
//! products, conjugate gradients and a dense LU fallback.

use std::fmt::Write as _;

use crate::hodge::DiagonalOperator;
use crate::par::{self, Execution};
use crate::{Error, Result};

pub type DenseVector = Vec<f64>;

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a CSR matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in input order; entries whose sum is exactly zero are dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        assert!(
            triplets.iter().all(|&(r, c, _)| r < rows && c < cols),
            "triplet index out of bounds"
        );
        // stable: duplicates keep their insertion order, fixing the summation order
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            let mut j = i + 1;
            while j < triplets.len() && triplets[j].0 == r && triplets[j].1 == c {
                v += triplets[j].2;
                j += 1;
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
            i = j;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|i| vals[i]).unwrap_or(0.0)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn diagonal(&self) -> DenseVector {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> DenseVector {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// Largest `|A - Aᵀ|` entry; zero means bitwise symmetric.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .into_iter()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x` using the default execution mode.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        self.matvec_with(x, Execution::default())
    }

    /// `y = A x`. Each row is summed left to right, so the result is bitwise
    /// identical for every execution mode and thread count.
    pub fn matvec_with(&self, x: &[f64], exec: Execution) -> DenseVector {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        par::map_range(self.rows, exec, |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).fold(0.0, |acc, (&c, &v)| acc + v * x[c])
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// MatrixMarket `coordinate real general` text (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:.16e}", r + 1, c + 1, v);
        }
        s
    }

    /// Parses MatrixMarket coordinate text (`real` or `integer`, `general` or
    /// `symmetric`).
    pub fn from_matrix_market(text: &str) -> Result<Self> {
        const FILE: &str = "matrix market";
        let err = |line: usize, msg: &str| Error::Parse {
            file: FILE.into(),
            line,
            column: 1,
            message: msg.into(),
        };
        let mut lines = text.lines().enumerate();
        let (_, banner) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let banner_lc = banner.to_ascii_lowercase();
        if !banner_lc.starts_with("%%matrixmarket matrix coordinate") {
            return Err(err(1, "expected '%%MatrixMarket matrix coordinate' banner"));
        }
        if banner_lc.contains("complex") || banner_lc.contains("pattern") {
            return Err(err(1, "only real and integer fields are supported"));
        }
        let symmetric = banner_lc.contains("symmetric");
        let mut body = lines.filter(|(_, l)| !l.trim_start().starts_with('%') && !l.trim().is_empty());
        let (hl, header) = body.next().ok_or_else(|| err(2, "missing size line"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(hl + 1, "invalid size line")))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(err(hl + 1, "size line needs rows, cols, nnz"));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let (ln, line) = body.next().ok_or_else(|| err(hl + 2, "fewer entries than announced"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err(ln + 1, "entry needs row, col, value"));
            }
            let r: usize = toks[0].parse().map_err(|_| err(ln + 1, "invalid row"))?;
            let c: usize = toks[1].parse().map_err(|_| err(ln + 1, "invalid column"))?;
            let v: f64 = toks[2].parse().map_err(|_| err(ln + 1, "invalid value"))?;
            if r == 0 || c == 0 || r > rows || c > cols {
                return Err(err(ln + 1, "index out of range"));
            }
            triplets.push((r - 1, c - 1, v));
            if symmetric && r != c {
                triplets.push((c - 1, r - 1, v));
            }
        }
        Ok(Self::from_triplets(rows, cols, triplets))
    }
}

/// `Aᵀ · D · B` for sparse `A` (m×n), diagonal `D` (m×m) and sparse `B`
/// (m×p). Each term is formed as `d · (a · b)`, so with `A == B` the result
/// is exactly symmetric.
pub fn triple_product(a: &SparseMatrix, d: &DiagonalOperator, b: &SparseMatrix) -> Result<SparseMatrix> {
    triple_product_diag(a, d.diagonal(), b)
}

pub(crate) fn triple_product_diag(a: &SparseMatrix, d: &[f64], b: &SparseMatrix) -> Result<SparseMatrix> {
    if a.rows != d.len() || b.rows != d.len() {
        return Err(Error::DimensionMismatch(format!(
            "AᵀDB with A {}x{}, D {}x{}, B {}x{}",
            a.rows,
            a.cols,
            d.len(),
            d.len(),
            b.rows,
            b.cols
        )));
    }
    let mut triplets = Vec::new();
    for (r, &w) in d.iter().enumerate() {
        let (ac, av) = a.row(r);
        let (bc, bv) = b.row(r);
        for (&i, &x) in ac.iter().zip(av) {
            for (&j, &y) in bc.iter().zip(bv) {
                triplets.push((i, j, w * (x * y)));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(a.cols, b.cols, triplets))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `‖b - Ax‖ ≤ tol · ‖b‖`.
    pub tol: f64,
    /// Defaults to `10 n` when `None`.
    pub max_iter: Option<usize>,
    pub jacobi: bool,
    pub exec: Execution,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: None,
            jacobi: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub x: DenseVector,
    pub iterations: usize,
    /// Final true relative residual `‖b - Ax‖ / ‖b‖`.
    pub residual: f64,
}

/// Conjugate gradients for a symmetric positive definite `A`, optionally
/// Jacobi preconditioned. Starts from zero.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], opts: &CgOptions) -> Result<CgOutcome> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "CG with A {}x{} and b of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidProblem(format!("CG tolerance must be positive, got {}", opts.tol)));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem("right-hand side has non-finite entries".into()));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual: 0.0 });
    }

    let inv_diag: Option<Vec<f64>> = if opts.jacobi {
        let d = a.diagonal();
        if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Breakdown { iteration: 0, curvature: d[i] });
        }
        Some(d.iter().map(|v| 1.0 / v).collect())
    } else {
        None
    };
    let precondition = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(m) => r.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => r.to_vec(),
        }
    };

    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = opts.tol * bnorm;
    let mut iterations = 0;
    while iterations < max_iter {
        let ap = a.matvec_with(&p, opts.exec);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: iterations, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        if norm2(&r) <= target {
            break;
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let ax = a.matvec_with(&x, opts.exec);
    let residual = norm2(&b.iter().zip(&ax).map(|(b, y)| b - y).collect::<Vec<_>>()) / bnorm;
    if norm2(&r) > target {
        return Err(Error::NotConverged { iterations, residual });
    }
    Ok(CgOutcome { x, iterations, residual })
}

/// Largest system the dense fallback accepts.
pub const DENSE_LIMIT: usize = 2000;

/// Dense LU with partial pivoting.
pub fn dense_solve(a: &SparseMatrix, b: &[f64]) -> Result<DenseVector> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "dense solve with A {}x{} and b of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    if n > DENSE_LIMIT {
        return Err(Error::DimensionMismatch(format!(
            "dense solve limited to {DENSE_LIMIT} unknowns, got {n}"
        )));
    }
    let mut m = a.to_dense();
    let mut x = b.to_vec();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[piv][k].abs() <= 1e-14 * scale {
            return Err(Error::Singular(k));
        }
        m.swap(k, piv);
        x.swap(k, piv);
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for (off, row) in tail.iter_mut().enumerate() {
            let f = row[k] / pivot_row[k];
            if f != 0.0 {
                for c in k..n {
                    row[c] -= f * pivot_row[c];
                }
                x[k + 1 + off] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k][c] * x[c]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_cg_one_step() {
        let a = SparseMatrix::from_diagonal(&[4.0]);
        let out = cg_solve(&a, &[8.0], &CgOptions::default()).unwrap();
        assert_eq!(out.x, vec![2.0]);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        );
        let b = [1.0, 2.0];
        let out = cg_solve(&a, &b, &CgOptions::default()).unwrap();
        assert_relative_eq!(out.x[0], 1.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(out.x[1], 7.0 / 11.0, max_relative = 1e-12);
        assert!(out.iterations <= 2);
        let lu = dense_solve(&a, &b).unwrap();
        assert_relative_eq!(lu[0], 1.0 / 11.0, max_relative = 1e-14);
        assert_relative_eq!(lu[1], 7.0 / 11.0, max_relative = 1e-14);
        let jac = cg_solve(&a, &b, &CgOptions { jacobi: true, ..Default::default() }).unwrap();
        assert_relative_eq!(jac.x[1], 7.0 / 11.0, max_relative = 1e-10);
    }

    #[test]
    fn indefinite_breaks_down() {
        let a = SparseMatrix::from_diagonal(&[1.0, -1.0]);
        let err = cg_solve(&a, &[0.0, 1.0], &CgOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. }), "{err}");
    }

    #[test]
    fn zero_rhs_and_bad_tolerance() {
        let a = SparseMatrix::identity(3);
        let out = cg_solve(&a, &[0.0; 3], &CgOptions::default()).unwrap();
        assert_eq!((out.x, out.iterations), (vec![0.0; 3], 0));
        let opts = CgOptions { tol: 0.0, ..Default::default() };
        assert!(cg_solve(&a, &[1.0; 3], &opts).is_err());
    }

    #[test]
    fn non_convergence_reported() {
        // 1D Laplacian needs more than two iterations
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let opts = CgOptions { max_iter: Some(2), ..Default::default() };
        let err = cg_solve(&a, &vec![1.0; n], &opts).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 2, .. }), "{err}");
    }

    #[test]
    fn triple_product_identity() {
        let i = SparseMatrix::identity(2);
        let d = DiagonalOperator::new(crate::hodge::HodgeRole::Hodge11, vec![2.0, 3.0]);
        let k = triple_product(&i, &d, &i).unwrap();
        assert_eq!(k.to_dense(), vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        let bad = SparseMatrix::identity(3);
        assert!(triple_product(&bad, &d, &i).is_err());
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (1, 1, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = SparseMatrix::from_triplets(3, 2, vec![(0, 1, 0.1), (2, 0, -1.0 / 3.0)]);
        let back = SparseMatrix::from_matrix_market(&m.to_matrix_market()).unwrap();
        assert_eq!(back, m);
        let sym = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 -1\n";
        let s = SparseMatrix::from_matrix_market(sym).unwrap();
        assert_eq!(s.get(0, 1), -1.0);
        assert!(SparseMatrix::from_matrix_market("garbage\n").is_err());
    }

    fn arb_triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..12, 1usize..12).prop_flat_map(|(r, c)| {
            (
                Just(r),
                Just(c),
                proptest::collection::vec((0..r, 0..c, -10.0f64..10.0), 0..60),
            )
        })
    }

    proptest! {
        #[test]
        fn matvec_matches_triplet_oracle((r, c, t) in arb_triplets(), seed in 0u64..1000) {
            let x: Vec<f64> = (0..c).map(|i| ((i as u64 * 7919 + seed) % 101) as f64 / 17.0 - 3.0).collect();
            let mut oracle = vec![0.0; r];
            let mut magnitude = vec![0.0; r];
            for &(i, j, v) in &t {
                oracle[i] += v * x[j];
                magnitude[i] += (v * x[j]).abs();
            }
            let m = SparseMatrix::from_triplets(r, c, t);
            let seq = m.matvec_with(&x, Execution::Sequential);
            let par = m.matvec_with(&x, Execution::Parallel);
            prop_assert_eq!(&seq, &par);
            for ((a, b), m) in seq.iter().zip(&oracle).zip(&magnitude) {
                prop_assert!((a - b).abs() <= 1e-14 * m);
            }
        }

        #[test]
        fn self_triple_product_is_symmetric((r, c, t) in arb_triplets()) {
            let a = SparseMatrix::from_triplets(r, c, t);
            let d: Vec<f64> = (0..r).map(|i| (i as f64 * 1.37).sin()).collect();
            let k = triple_product_diag(&a, &d, &a).unwrap();
            prop_assert_eq!(k.asymmetry(), 0.0);
        }
    }
}
