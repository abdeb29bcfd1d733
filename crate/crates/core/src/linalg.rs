//! Sparse operators and the handful of dense/sparse solvers the rest of the
//! crate needs. Factorizations and eigenvalue routines come from `faer`.

use std::io::Write;

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which an operator counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    Symmetric,
    General,
}

/// Sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl LinearOperator {
    /// Builds an operator from (row, col, value) triplets. Duplicates are
    /// summed and entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        symmetry: Symmetry,
    ) -> Self {
        let mut trips: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        trips.sort_unstable_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trips.len());
        let mut values = Vec::with_capacity(trips.len());
        let mut rows = Vec::with_capacity(trips.len());
        let mut i = 0;
        while i < trips.len() {
            let (r, c, _) = trips[i];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            let mut sum = 0.0;
            while i < trips.len() && trips[i].0 == r && trips[i].1 == c {
                sum += trips[i].2;
                i += 1;
            }
            if sum != 0.0 {
                rows.push(r);
                col_idx.push(c);
                values.push(sum);
            }
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetry,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_triplets(
            n,
            n,
            values.iter().enumerate().map(|(i, &v)| (i, i, v)),
            Symmetry::Symmetric,
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, std::iter::empty(), Symmetry::General)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.col_idx[p], self.values[p]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in apply");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows, "dimension mismatch in apply_transpose");
        let mut out = vec![0.0; self.ncols];
        for (r, c, v) in self.triplets() {
            out[c] += v * y[r];
        }
        out
    }

    /// `uᵀ A v`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.apply(v))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v)),
            self.symmetry,
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let mut trips = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trips.push((r, c, acc[c]));
                acc[c] = 0.0;
                mark[c] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, trips, Symmetry::General)
    }

    /// `Bᵀ A B`, tagged symmetric when `A` is.
    pub fn congruence(&self, b: &Self) -> Self {
        let mut out = b.transpose().matmul(&self.matmul(b));
        if self.symmetry == Symmetry::Symmetric {
            out = out.symmetrized();
        }
        out
    }

    /// `(A + Aᵀ)/2`, tagged symmetric.
    pub fn symmetrized(&self) -> Self {
        let trips = self
            .triplets()
            .flat_map(|(r, c, v)| [(r, c, 0.5 * v), (c, r, 0.5 * v)]);
        Self::from_triplets(self.nrows, self.ncols, trips.collect::<Vec<_>>(), Symmetry::Symmetric)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `A + factor·B`
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let symmetry = if self.symmetry == Symmetry::Symmetric && other.symmetry == Symmetry::Symmetric {
            Symmetry::Symmetric
        } else {
            Symmetry::General
        };
        let trips: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, factor * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, trips, symmetry)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ|`
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.add_scaled(&self.transpose(), -1.0).max_abs()
    }

    pub fn is_numerically_symmetric(&self) -> bool {
        self.asymmetry() <= SYMMETRY_TOL * self.max_abs()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn to_csc(&self) -> SparseColMat<usize, f64> {
        let trips: Vec<_> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("triplets are in bounds")
    }

    /// Writes one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {}", fmt_f64(v))?;
        }
        Ok(())
    }

    /// Reads the output of [`LinearOperator::write_coo`].
    pub fn read_coo(text: &str, nrows: usize, ncols: usize, symmetry: Symmetry) -> Result<Self> {
        let mut trips = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: &str| Error::ParseError {
                line: lineno + 1,
                message: message.to_string(),
            };
            let mut it = line.split_whitespace();
            let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad row"))?;
            let c: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad column"))?;
            let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad value"))?;
            if r >= nrows || c >= ncols {
                return Err(parse_err("index out of range"));
            }
            trips.push((r, c, v));
        }
        Ok(Self::from_triplets(nrows, ncols, trips, symmetry))
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Sparse LU factorization of a square operator.
pub struct SparseLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn new(op: &LinearOperator) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::SingularSystem("matrix is not square".into()));
        }
        let lu = op
            .to_csc()
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
        Ok(Self { lu, n: op.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

/// True when the sparse Cholesky factorization of `op` succeeds.
pub fn is_positive_definite(op: &LinearOperator) -> bool {
    op.nrows() == op.ncols() && op.to_csc().sp_cholesky(Side::Lower).is_ok()
}

/// Sorted eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Sorted eigenvalues of the symmetric pencil `A x = λ B x` with `B`
/// positive definite, computed densely through the Cholesky factor of `B`.
pub fn generalized_eigenvalues(a: &Mat<f64>, b: &Mat<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    assert_eq!((n, n), (a.ncols(), b.nrows()));
    if n == 0 {
        return Ok(Vec::new());
    }
    let llt = b
        .llt(Side::Lower)
        .map_err(|e| Error::EigenFailure(format!("metric is not positive definite: {e:?}")))?;
    let l = llt.L();
    // X = L⁻¹ A, then C = L⁻¹ Xᵀ = L⁻¹ A L⁻ᵀ.
    let mut x = a.to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    symmetric_eigenvalues(&sym)
}

/// Singular values of a dense matrix, largest first.
pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv = a
        .singular_values()
        .map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Numerical rank: singular values above `rel_tol·σ_max`.
pub fn numerical_rank(a: &Mat<f64>, rel_tol: f64) -> Result<usize> {
    let sv = singular_values(a)?;
    let Some(&max) = sv.first() else { return Ok(0) };
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * max).count())
}

/// Ordinary least-squares line through `(x, y)`: returns (slope, intercept).
pub fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
