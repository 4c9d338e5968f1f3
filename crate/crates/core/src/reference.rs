//! Reference vectors `F(A) b` for benchmarks and acceptance checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::{arnoldi, arnoldi_approximation};
use crate::operators::{LinearOperator, SparseMatrix};
use crate::restart::TransformFunction;
use crate::smallmat::{eig_hermitian, unit};

/// Largest dimension handled by a dense eigendecomposition of `A`.
pub const DENSE_LIMIT: usize = 1000;
/// Krylov dimension of the unrestarted reference.
pub const REFERENCE_STEPS: usize = 400;
const DB_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    DenseSpectral,
    /// Unrestarted Lanczos (Hermitian) or Arnoldi with this many steps.
    Krylov(usize),
}

/// Picks the method: dense for Hermitian `n <= 1000`, otherwise 400 Krylov
/// steps.
pub fn default_method(a: &SparseMatrix) -> ReferenceMethod {
    if a.is_symmetric() && a.dim() <= DENSE_LIMIT {
        ReferenceMethod::DenseSpectral
    } else {
        ReferenceMethod::Krylov(REFERENCE_STEPS)
    }
}

fn closed_form(f: &TransformFunction) -> Result<&(dyn Fn(f64) -> f64 + Send + Sync)> {
    f.closed_form
        .as_ref()
        .map(|c| c.0.as_ref())
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no closed form", f.name)))
}

/// `F(A) b` by the default method for `a`.
pub fn reference_solution(a: &SparseMatrix, b: &[f64], f: &TransformFunction) -> Result<Vec<f64>> {
    reference_with(a, b, f, default_method(a))
}

pub fn reference_with(
    a: &SparseMatrix,
    b: &[f64],
    f: &TransformFunction,
    method: ReferenceMethod,
) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    match method {
        ReferenceMethod::DenseSpectral => {
            if !a.is_symmetric() {
                return Err(Error::NotHermitian);
            }
            let cf = closed_form(f)?;
            let eig = eig_hermitian(&a.to_dense())?;
            let coeffs = eig.vectors().tr_mul(&DVector::from_column_slice(b));
            let scaled = coeffs.zip_map(eig.eigenvalues(), |c, l| c * cf(l));
            Ok((eig.vectors() * scaled).as_slice().to_vec())
        }
        ReferenceMethod::Krylov(steps) => krylov_reference(a, b, f, steps),
    }
}

fn krylov_reference<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    steps: usize,
) -> Result<Vec<f64>> {
    let dec = arnoldi(op, b, steps.min(op.dim()))?;
    if dec.is_hermitian() {
        let cf = closed_form(f)?;
        arnoldi_approximation(&dec, |h| Ok(eig_hermitian(h)?.apply_fn_e1(cf)))
    } else {
        arnoldi_approximation(&dec, |h| dense_nonsymmetric_e1(h, f))
    }
}

/// `F(H) e_1` for a nonsymmetric `H`; supports the powers `-1/2`, `-3/2` and
/// `1/2`, all through the Denman-Beavers iteration.
pub fn dense_nonsymmetric_e1(h: &DMatrix<f64>, f: &TransformFunction) -> Result<DVector<f64>> {
    let m = h.nrows();
    let e1 = unit(m, 0);
    let probe = |s: f64| f.eval_scalar(s);
    let is_power = |p: f64| {
        [0.5, 2.0, 7.3]
            .iter()
            .all(|&s| probe(s).is_some_and(|v| (v - s.powf(p)).abs() <= 1e-14 * v.abs()))
    };
    if is_power(-0.5) {
        Ok(inverse_sqrt(h)? * e1)
    } else if is_power(-1.5) {
        let y = inverse_sqrt(h)? * e1;
        h.clone()
            .lu()
            .solve(&y)
            .ok_or(Error::SingularShift { shift: 0.0 })
    } else if is_power(0.5) {
        Ok(h * (inverse_sqrt(h)? * e1))
    } else {
        Err(Error::InvalidArgument(format!(
            "no dense nonsymmetric reference for {}",
            f.name
        )))
    }
}

fn log_abs_det(a: &DMatrix<f64>) -> Result<f64> {
    let lu = a.clone().lu();
    let u = lu.u();
    let mut s = 0.0;
    for i in 0..a.nrows() {
        let d = u[(i, i)].abs();
        if d == 0.0 {
            return Err(Error::SingularShift { shift: 0.0 });
        }
        s += d.ln();
    }
    Ok(s)
}

/// `H^{-1/2}` by the determinant-scaled Denman-Beavers iteration.
pub fn inverse_sqrt(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = h.nrows();
    let mut y = h.clone();
    let mut z = DMatrix::identity(m, m);
    for it in 0..DB_MAX_ITER {
        let mu = if it < 10 {
            (-(log_abs_det(&y)? + log_abs_det(&z)?) / (2.0 * m as f64)).exp()
        } else {
            1.0
        };
        let yi = (&y * mu).try_inverse().ok_or(Error::SingularShift { shift: 0.0 })?;
        let zi = (&z * mu).try_inverse().ok_or(Error::SingularShift { shift: 0.0 })?;
        let y_next = (&y * mu + zi) * 0.5;
        let z_next = (&z * mu + yi) * 0.5;
        let change = (&z_next - &z).norm() / z_next.norm();
        y = y_next;
        z = z_next;
        if !change.is_finite() {
            return Err(Error::NonFinite("Denman-Beavers iteration"));
        }
        if change <= 1e-15 && it >= 10 {
            return Ok(z);
        }
    }
    Ok(z)
}
