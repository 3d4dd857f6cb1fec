//! Compressed sparse row matrices, direct and iterative solvers, a
//! definiteness test and the Picard fixed-point driver.

mod factor;
mod market;
mod ordering;
mod picard;
mod solve;

use thiserror::Error;

pub use factor::{BandLu, EnvelopeCholesky};
pub use market::write_matrix_market;
pub use ordering::reverse_cuthill_mckee;
pub use picard::{picard_solve, PicardOptions, PicardOutcome};
pub use solve::{is_spd, solve, solve_with, Factorization, SolveMethod, SolveReport, SpdReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: matrix {matrix}, vector {vector}")]
    DimensionMismatch { matrix: usize, vector: usize },
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("Cholesky factorisation failed at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("conjugate gradient did not converge in {iterations} iterations")]
    CgNotConverged { iterations: usize },
    #[error("solution residual {residual:e} exceeds the bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("Picard iteration did not converge in {iterations} iterations")]
    PicardNotConverged { iterations: usize, last_iterate: Vec<f64>, history: Vec<f64> },
    #[error("entry ({row}, {col}) is outside a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Square sparse matrix in CSR form with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Coordinate-format accumulator; duplicates are summed on [`finalize`](TripletBuilder::finalize).
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn finalize(mut self) -> Result<SparseMatrix, SolveError> {
        let n = self.n;
        for &(r, c, v) in &self.entries {
            if r >= n || c >= n {
                return Err(SolveError::IndexOutOfRange { row: r, col: c, n });
            }
            if !v.is_finite() {
                return Err(SolveError::NonFinite { row: r, col: c });
            }
        }
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = SparseMatrix { n, row_ptr, col_idx, values, symmetric: false };
        m.symmetric = m.check_symmetric(1e-12);
        Ok(m)
    }
}

impl SparseMatrix {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, SolveError> {
        let mut b = TripletBuilder::new(n);
        for &(r, c, v) in triplets {
            b.add(r, c, v);
        }
        b.finalize()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, SolveError> {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SolveError::NotSquare { rows: n, cols: r.len() });
            }
            for (j, &v) in r.iter().enumerate() {
                b.add(i, j, v);
            }
        }
        b.finalize()
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n], symmetric: true }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Symmetry flag computed at construction (relative tolerance 1e-12).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::new(self.n);
        for (i, j, v) in self.triplets() {
            b.add(j, i, v);
        }
        b.finalize().expect("transpose of a valid matrix")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetry test with tolerance `rel * max|a_ij|`.
    pub fn check_symmetric(&self, rel: f64) -> bool {
        self.asymmetry_witness(rel).is_none()
    }

    /// First pair `(i, j)` with `|a_ij - a_ji|` above `rel * max|a|`.
    pub fn asymmetry_witness(&self, rel: f64) -> Option<(usize, usize)> {
        let tol = rel * self.max_abs();
        self.triplets().find(|&(i, j, v)| (v - self.get(j, i)).abs() > tol).map(|(i, j, _)| (i, j))
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &SparseMatrix, alpha: f64) -> SparseMatrix {
        let mut b = TripletBuilder::new(self.n);
        for (i, j, v) in self.triplets() {
            b.add(i, j, v);
        }
        for (i, j, v) in other.triplets() {
            b.add(i, j, alpha * v);
        }
        b.finalize().expect("sum of valid matrices")
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> SparseMatrix {
        let mut b = TripletBuilder::new(self.n);
        for (i, j, v) in self.triplets() {
            b.add(i, j, v);
        }
        for (i, &v) in d.iter().enumerate() {
            b.add(i, i, v);
        }
        b.finalize().expect("valid matrix")
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// Number of entries above `rel * max|a|` in row `i`.
    pub fn stencil_size(&self, i: usize, rel: f64) -> usize {
        let tol = rel * self.max_abs();
        self.row(i).filter(|(_, v)| v.abs() > tol).count()
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect()
    }
}

/// A square system `A x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(matrix: SparseMatrix, rhs: Vec<f64>) -> Result<Self, SolveError> {
        if matrix.dim() != rhs.len() {
            return Err(SolveError::DimensionMismatch { matrix: matrix.dim(), vector: rhs.len() });
        }
        Ok(LinearSystem { matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.matrix.mul_vec(x);
        self.rhs.iter().zip(ax).map(|(b, a)| b - a).collect()
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
