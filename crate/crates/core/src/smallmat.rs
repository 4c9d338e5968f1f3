//! Dense kernels on small Hessenberg matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Taylor threshold for `||t H||_1` per scaling step.
const TAYLOR_THETA: f64 = 5.37;
const TAYLOR_MAX_DEGREE: usize = 40;
/// Beyond this many Taylor scaling steps the dense Padé route is used.
const TAYLOR_MAX_STEPS: usize = 25;
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigendecomposition `H = X diag(D) X^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectralCache {
    eigenvalues: DVector<f64>,
    vectors: DMatrix<f64>,
    first_row: DVector<f64>,
    last_row: DVector<f64>,
}

impl SpectralCache {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `exp(-t H) v`
    pub fn exp_action(&self, v: &DVector<f64>, t: f64) -> DVector<f64> {
        let coeffs = self.vectors.tr_mul(v);
        let scaled = coeffs.zip_map(&self.eigenvalues, |c, l| c * (-t * l).exp());
        &self.vectors * scaled
    }

    /// `exp(-t H) e_1`
    pub fn exp_e1(&self, t: f64) -> DVector<f64> {
        let scaled = self.first_row.zip_map(&self.eigenvalues, |c, l| c * (-t * l).exp());
        &self.vectors * scaled
    }

    /// `e_m^T exp(-t H) e_1`
    pub fn exp_entry(&self, t: f64) -> f64 {
        self.first_row
            .iter()
            .zip(self.last_row.iter())
            .zip(self.eigenvalues.iter())
            .map(|((a, b), l)| a * b * (-t * l).exp())
            .sum()
    }

    /// `F(H) e_1` for a scalar function `F`.
    pub fn apply_fn_e1(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let scaled = self.first_row.zip_map(&self.eigenvalues, |c, l| c * f(l));
        &self.vectors * scaled
    }
}

fn check_finite(h: &DMatrix<f64>) -> Result<()> {
    if h.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("small matrix"))
    }
}

fn check_square(h: &DMatrix<f64>) -> Result<()> {
    if h.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        })
    }
}

/// Symmetric eigendecomposition with ascending eigenvalues.
pub fn eig_hermitian(h: &DMatrix<f64>) -> Result<SpectralCache> {
    check_square(h)?;
    check_finite(h)?;
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let asym = (h - h.transpose()).norm() / scale;
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let m = h.nrows();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(m, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);
    let first_row = vectors.row(0).transpose();
    let last_row = vectors.row(m - 1).transpose();
    Ok(SpectralCache {
        eigenvalues,
        vectors,
        first_row,
        last_row,
    })
}

fn norm1(h: &DMatrix<f64>) -> f64 {
    h.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(-t H) v`. Uses `cache` when given, otherwise a shifted, scaled
/// truncated Taylor series, or dense Padé when the Taylor route would need
/// too many scaling steps.
pub fn expm_action(
    h: &DMatrix<f64>,
    v: &DVector<f64>,
    t: f64,
    cache: Option<&SpectralCache>,
) -> Result<DVector<f64>> {
    check_square(h)?;
    if v.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            actual: v.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    if let Some(c) = cache {
        return Ok(c.exp_action(v, t));
    }
    check_finite(h)?;
    let m = h.nrows();
    let mu = h.trace() / m as f64;
    let shifted = h - DMatrix::identity(m, m) * mu;
    let steps = (t * norm1(&shifted) / TAYLOR_THETA).ceil().max(1.0);
    if steps > TAYLOR_MAX_STEPS as f64 {
        let e = pade_expm(&(h * -t))?;
        return Ok(e * v);
    }
    let steps = steps as usize;
    let dt = t / steps as f64;
    let damp = (-mu * dt).exp();
    let mut w = v.clone();
    for _ in 0..steps {
        let mut acc = w.clone();
        let mut term = w;
        let mut prev_small = false;
        for k in 1..=TAYLOR_MAX_DEGREE {
            term = (&shifted * term) * (-dt / k as f64);
            acc += &term;
            let small = term.norm() <= f64::EPSILON * 0.5 * acc.norm();
            if small && prev_small {
                break;
            }
            prev_small = small;
        }
        w = acc * damp;
    }
    Ok(w)
}

/// `exp(-t_i H) e_1` for every `t_i`.
pub fn expm_e1_batch(
    h: &DMatrix<f64>,
    ts: &[f64],
    cache: Option<&SpectralCache>,
) -> Result<Vec<DVector<f64>>> {
    let m = h.nrows();
    if let Some(c) = cache {
        return Ok(ts.iter().map(|&t| c.exp_e1(t)).collect());
    }
    let e1 = unit(m, 0);
    ts.iter().map(|&t| expm_action(h, &e1, t, None)).collect()
}

pub(crate) fn unit(m: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(m);
    e[k] = 1.0;
    e
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by degree-13 Padé approximation with scaling and squaring.
pub fn pade_expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(a)?;
    check_finite(a)?;
    let m = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(m, m);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(Error::NonFinite("Pade denominator"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    check_finite(&r)?;
    Ok(r)
}

/// Solves `(H + t I) x = rhs`.
pub fn resolvent_solve(h: &DMatrix<f64>, t: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    check_square(h)?;
    let m = h.nrows();
    let shifted = h + DMatrix::identity(m, m) * t;
    let scale = norm1(&shifted).max(f64::MIN_POSITIVE);
    let lu = shifted.lu();
    let u = lu.u();
    let min_pivot = (0..m).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-14 * scale {
        return Err(Error::SingularShift { shift: t });
    }
    let x = lu.solve(rhs).ok_or(Error::SingularShift { shift: t })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularShift { shift: t });
    }
    Ok(x)
}

/// `psi(t) = e_m^T (H + t I)^{-1} e_1`
pub fn resolvent_entry(h: &DMatrix<f64>, t: f64) -> Result<f64> {
    let m = h.nrows();
    let x = resolvent_solve(h, t, &unit(m, 0))?;
    Ok(x[m - 1])
}

/// Smallest and largest real part over the spectrum of `H`.
pub fn real_part_range(h: &DMatrix<f64>, hermitian: bool) -> Result<(f64, f64)> {
    check_square(h)?;
    check_finite(h)?;
    let re: Vec<f64> = if hermitian {
        let sym = (h + h.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().copied().collect()
    } else {
        nalgebra::linalg::Schur::try_new(h.clone(), f64::EPSILON, 10_000)
            .ok_or(Error::EigenFailure)?
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect()
    };
    let lo = re.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// `min Re spec(H)`
pub fn smallest_real_part(h: &DMatrix<f64>, hermitian: bool) -> Result<f64> {
    real_part_range(h, hermitian).map(|r| r.0)
}
