//! Sparse storage, the matvec-only operator abstraction and the benchmark
//! matrix generators.

mod generators;
mod graph;
mod market;

pub use generators::{convection_diffusion_nd, kron_sum, laplacian_nd, tridiagonal};
pub use graph::{graph_laplacian, largest_connected_component, random_graph, Graph};
pub use market::{
    parse_matrix_market, read_graph, read_matrix_market, write_matrix_market,
    write_matrix_market_to,
};

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Anything that can form `y = A x` for a square `A`.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn is_hermitian(&self) -> bool {
        false
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn is_hermitian(&self) -> bool {
        (**self).is_hermitian()
    }
}

/// Wraps an operator and tallies every application.
#[derive(Debug)]
pub struct Counted<O> {
    inner: O,
    count: AtomicUsize,
}

impl<O: LinearOperator> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn matvecs(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: LinearOperator> LinearOperator for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(x, y);
    }
    fn is_hermitian(&self) -> bool {
        self.inner.is_hermitian()
    }
}

/// A dense matrix behind the operator interface; used for small test problems.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    hermitian: bool,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let hermitian = matrix == matrix.transpose();
        Ok(Self { matrix, hermitian })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.matrix.column(j).iter()) {
                *yi += a * xj;
            }
        }
    }
    fn is_hermitian(&self) -> bool {
        self.hermitian
    }
}

/// Square matrix in compressed sparse row form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Assembles an `n x n` matrix from `(row, col, value)` triplets.
    /// Duplicate entries are summed.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &entries {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) out of range for dimension {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse matrix entry"));
            }
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            col_idx.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
            symmetric: true,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let trips = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m[(i, j)] != 0.0)
            .map(|(i, j)| (i, j, m[(i, j)]));
        let mut out = Self::from_triplets(n, trips)?;
        out.symmetric = m == &m.transpose();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the matrix is flagged symmetric. The flag is only ever set
    /// after a verified transpose comparison or by a generator that
    /// constructs a symmetric matrix by definition.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Sets the symmetric flag after checking `A == A^T` exactly.
    pub fn mark_symmetric(mut self) -> Result<Self> {
        let t = self.transpose();
        if t.col_idx != self.col_idx || t.values != self.values {
            let diff = self.add_scaled(&t, -1.0)?.norm_inf();
            return Err(Error::NotSymmetric(diff / self.norm_inf().max(f64::MIN_POSITIVE)));
        }
        self.symmetric = true;
        Ok(self)
    }

    /// Recomputes the symmetric flag by transpose comparison.
    pub fn detect_symmetry(mut self) -> Self {
        let t = self.transpose();
        self.symmetric = t.col_idx == self.col_idx && t.values == self.values;
        self
    }

    pub(crate) fn set_symmetric_unchecked(mut self, flag: bool) -> Self {
        self.symmetric = flag;
        self
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn transpose(&self) -> Self {
        let trips = self.triplets().map(|(i, j, v)| (j, i, v));
        let mut t = Self::from_triplets(self.n, trips).expect("transpose keeps indices in range");
        t.symmetric = self.symmetric;
        t
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let trips = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)));
        let out = Self::from_triplets(self.n, trips)?;
        Ok(out.set_symmetric_unchecked(self.symmetric && other.symmetric))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        scale_values(&mut out.values, alpha);
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n, "matvec input length");
        assert_eq!(y.len(), self.n, "matvec output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *yi = self.col_idx[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }
}

fn scale_values(v: &mut [f64], alpha: f64) {
    v.iter_mut().for_each(|x| *x *= alpha);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
    fn is_hermitian(&self) -> bool {
        self.symmetric
    }
}
