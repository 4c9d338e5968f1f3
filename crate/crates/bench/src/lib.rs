//! Shared fixtures for the criterion benches.

use lkv_core::experiments::ones_unit;
use lkv_core::operators::laplacian_nd;
use lkv_core::SparseMatrix;

/// 3D Laplacian with `n` points per dimension and the normalized all-ones vector.
pub fn laplacian_problem(n: usize) -> (SparseMatrix, Vec<f64>) {
    let a = laplacian_nd(n, 3).expect("grid size is positive");
    let b = ones_unit(a.dim());
    (a, b)
}
