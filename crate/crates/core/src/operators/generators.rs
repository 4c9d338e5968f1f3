use crate::error::{Error, Result};

use super::SparseMatrix;

/// `tridiag(lower, diag, upper)` of size `n`.
pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> SparseMatrix {
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 && lower != 0.0 {
            trips.push((i, i - 1, lower));
        }
        if diag != 0.0 {
            trips.push((i, i, diag));
        }
        if i + 1 < n && upper != 0.0 {
            trips.push((i, i + 1, upper));
        }
    }
    SparseMatrix::from_triplets(n, trips)
        .expect("tridiagonal indices are in range")
        .set_symmetric_unchecked(lower == upper)
}

/// Kronecker sum `M1 ⊗ I + I ⊗ M2`. Row `i1 * m2 + i2` belongs to grid
/// point `(i1, i2)`.
pub fn kron_sum(m1: &SparseMatrix, m2: &SparseMatrix) -> Result<SparseMatrix> {
    let (n1, n2) = (m1.dim(), m2.dim());
    let n = n1
        .checked_mul(n2)
        .ok_or_else(|| Error::InvalidArgument("Kronecker sum dimension overflows".into()))?;
    let mut trips = Vec::with_capacity(m1.nnz() * n2 + m2.nnz() * n1);
    for (i1, j1, v) in m1.triplets() {
        for k in 0..n2 {
            trips.push((i1 * n2 + k, j1 * n2 + k, v));
        }
    }
    for k in 0..n1 {
        for (i2, j2, v) in m2.triplets() {
            trips.push((k * n2 + i2, k * n2 + j2, v));
        }
    }
    let out = SparseMatrix::from_triplets(n, trips)?;
    Ok(out.set_symmetric_unchecked(m1.is_symmetric() && m2.is_symmetric()))
}

fn check_dims(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size must be at least 1".into()));
    }
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 1, 2 or 3, got {d}"
        )));
    }
    Ok(())
}

fn kron_chain(factors: &[SparseMatrix]) -> Result<SparseMatrix> {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = kron_sum(&acc, f)?;
    }
    Ok(acc)
}

/// Finite-difference Laplacian `A_1 ⊕ … ⊕ A_1` (d factors) with
/// `A_1 = tridiag(-1, 2, -1)` of size `n`. No mesh scaling.
pub fn laplacian_nd(n: usize, d: usize) -> Result<SparseMatrix> {
    check_dims(n, d)?;
    let a1 = tridiagonal(n, -1.0, 2.0, -1.0);
    kron_chain(&vec![a1; d])
}

/// Upwind convection-diffusion operator
/// `h^-2 eps A_L + h^-1 (A_2 ⊕ A_2^T ⊕ A_2)` with `A_2 = tridiag(-1, 1, 0)`,
/// `h = 1/(n+1)`. The transposed middle factor encodes the convection
/// direction `[1, -1, 1]`; lower dimensions keep the leading factors.
pub fn convection_diffusion_nd(n: usize, eps: f64, d: usize) -> Result<SparseMatrix> {
    check_dims(n, d)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "diffusion coefficient must be positive, got {eps}"
        )));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let a2 = tridiagonal(n, -1.0, 1.0, 0.0);
    let a2t = a2.transpose();
    let factors: Vec<SparseMatrix> = [a2.clone(), a2t, a2].into_iter().take(d).collect();
    let conv = kron_chain(&factors)?;
    let diff = laplacian_nd(n, d)?;
    let out = diff.scaled(eps / (h * h)).add_scaled(&conv, 1.0 / h)?;
    Ok(out.detect_symmetry())
}
