//! Comparators: two-pass Lanczos, full-storage Lanczos, CG, restarted GMRES
//! and the Stieltjes pipelines built from them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::{arnoldi, arnoldi_approximation};
use crate::operators::{Counted, LinearOperator};
use crate::restart::{
    exp_sqrt_stieltjes, inv_sqrt_stieltjes, stieltjes_restart, RestartConfig, RestartReport,
    StoppingMode,
};
use crate::smallmat::eig_hermitian;
use crate::vecops::{axpy, dot, norm2, scale};

/// Relative `beta_j` below which the Lanczos recurrence counts as broken down.
const LANCZOS_BREAKDOWN: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TwoPassConfig {
    pub tol: f64,
    /// Convergence is checked every `check_every` iterations.
    pub check_every: usize,
    pub max_iterations: usize,
    pub stopping: StoppingMode,
}

impl TwoPassConfig {
    pub fn new(tol: f64, check_every: usize) -> Self {
        Self {
            tol,
            check_every,
            max_iterations: 2000,
            stopping: StoppingMode::UpdateNorm,
        }
    }

    pub fn with_stopping(mut self, stopping: StoppingMode) -> Self {
        self.stopping = stopping;
        self
    }
}

#[derive(Debug, Clone)]
pub struct TwoPassReport {
    /// Iterations of the first pass.
    pub iterations: usize,
    pub matvecs: usize,
    /// Relative change of `F(T_j) e_1` at the last check.
    pub surrogate: f64,
    /// Relative error against the reference at the last check, when given.
    pub rel_error: Option<f64>,
    pub converged: bool,
}

fn tridiagonal_matrix(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let j = alpha.len();
    DMatrix::from_fn(j, j, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    })
}

/// One Lanczos step: `w = A v - beta_prev v_prev`, returns `(alpha, beta)`
/// and leaves the next unnormalized vector in `w`.
fn lanczos_step<O: LinearOperator + ?Sized>(
    op: &O,
    v: &[f64],
    v_prev: &[f64],
    beta_prev: f64,
    w: &mut [f64],
) -> (f64, f64) {
    op.apply(v, w);
    axpy(-beta_prev, v_prev, w);
    let alpha = dot(v, w);
    axpy(-alpha, v, w);
    (alpha, norm2(w))
}

/// Lanczos approximation `||b|| V_j F(T_j) e_1` computed with two passes
/// over the recurrence: the first builds `T_j` without storing the basis,
/// the second regenerates the basis vectors and accumulates the result.
///
/// With [`StoppingMode::UpdateNorm`] the check is
/// `||F(T_j) e_1 - [F(T_{j-c}) e_1; 0]|| <= tol ||F(T_j) e_1||`; with
/// [`StoppingMode::Reference`] the exact error of the (not yet formed)
/// iterate is tracked through the projections `v_i^T x_ref` and the part of
/// `x_ref` orthogonal to the basis.
pub fn two_pass_lanczos<O, F>(
    op: &O,
    b: &[f64],
    f: F,
    cfg: &TwoPassConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, TwoPassReport)>
where
    O: LinearOperator + ?Sized,
    F: Fn(f64) -> f64,
{
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if cfg.check_every == 0 || !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument("check_every and tol must be positive".into()));
    }
    if cfg.stopping == StoppingMode::Reference && reference.is_none() {
        return Err(Error::InvalidArgument("reference stopping needs a reference vector".into()));
    }
    let nb = norm2(b);
    if nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let ref_norm = reference.map(norm2);
    // component of the reference outside the basis built so far
    let mut outside: Vec<f64> = reference.map(|r| r.to_vec()).unwrap_or_default();

    let max_iter = cfg.max_iterations.min(n);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut proj = Vec::new();
    let mut v: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut beta_prev = 0.0;
    let mut prev_y: Option<DVector<f64>> = None;
    let mut surrogate = f64::INFINITY;
    let mut rel_error = None;
    let mut converged = false;
    let mut y_final = DVector::zeros(0);

    for j in 1..=max_iter {
        if reference.is_some() {
            let p = dot(&v, &outside);
            axpy(-p, &v, &mut outside);
            proj.push(p);
        }
        let (a, bn) = lanczos_step(op, &v, &v_prev, beta_prev, &mut w);
        alpha.push(a);
        let breakdown = bn <= LANCZOS_BREAKDOWN * (a.abs() + beta_prev);
        if j % cfg.check_every == 0 || breakdown || j == max_iter {
            let t = tridiagonal_matrix(&alpha, &beta);
            let y = eig_hermitian(&t)?.apply_fn_e1(&f);
            surrogate = match &prev_y {
                Some(p) => {
                    let mut d = y.clone();
                    for (i, pi) in p.iter().enumerate() {
                        d[i] -= pi;
                    }
                    d.norm() / y.norm()
                }
                None => f64::INFINITY,
            };
            if let Some(rn) = ref_norm {
                // ||x - r||^2 = ||nb y - V^T r||^2 + ||(I - V V^T) r||^2
                let p = DVector::from_column_slice(&proj);
                let inside = (&y * nb - &p).norm_squared();
                rel_error = Some((inside + dot(&outside, &outside)).sqrt() / rn);
            }
            let done = match cfg.stopping {
                StoppingMode::UpdateNorm => surrogate <= cfg.tol,
                StoppingMode::Reference => rel_error.is_some_and(|e| e <= cfg.tol),
            };
            y_final = y.clone();
            prev_y = Some(y);
            if done || breakdown {
                converged = true;
                break;
            }
        }
        beta.push(bn);
        beta_prev = bn;
        std::mem::swap(&mut v_prev, &mut v);
        v.copy_from_slice(&w);
        scale(1.0 / bn, &mut v);
    }
    let iterations = alpha.len();

    // second pass: replay the recurrence, j products as in the first pass
    let mut x = vec![0.0; n];
    let mut v: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let mut v_prev = vec![0.0; n];
    for i in 0..iterations {
        axpy(nb * y_final[i], &v, &mut x);
        op.apply(&v, &mut w);
        if i + 1 == iterations {
            break;
        }
        axpy(-alpha[i], &v, &mut w);
        if i > 0 {
            axpy(-beta[i - 1], &v_prev, &mut w);
        }
        scale(1.0 / beta[i], &mut w);
        std::mem::swap(&mut v_prev, &mut v);
        std::mem::swap(&mut v, &mut w);
    }
    let matvecs = 2 * iterations;
    Ok((
        x,
        TwoPassReport {
            iterations,
            matvecs,
            surrogate,
            rel_error,
            converged,
        },
    ))
}

/// `||b|| V_j F(T_j) e_1` with the basis stored (Lanczos with full
/// reorthogonalization through the Arnoldi routine).
pub fn full_lanczos<O, F>(op: &O, b: &[f64], j: usize, f: F) -> Result<Vec<f64>>
where
    O: LinearOperator + ?Sized,
    F: Fn(f64) -> f64,
{
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let dec = arnoldi(op, b, j.min(op.dim()))?;
    arnoldi_approximation(&dec, |h| Ok(eig_hermitian(h)?.apply_fn_e1(&f)))
}

/// Conjugate gradients from a zero initial guess until
/// `||b - A x|| <= rtol ||b||`. Returns the solution and the iteration count
/// (one matrix-vector product each).
pub fn cg_solve<O: LinearOperator + ?Sized>(op: &O, b: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let target = rtol * nb;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let cap = 10 * n;
    for it in 1..=cap {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NoConvergence {
                solver: "cg",
                reason: format!("non-positive curvature {pap:e} at iteration {it}"),
            });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::NoConvergence {
        solver: "cg",
        reason: format!("iteration cap {cap} reached"),
    })
}

/// Restarted GMRES(`restart`) with Givens rotations from a zero initial
/// guess. Returns the solution and the number of matrix-vector products
/// spent in the Arnoldi steps.
pub fn gmres_solve<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    rtol: f64,
    restart: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if restart == 0 {
        return Err(Error::InvalidArgument("restart length must be positive".into()));
    }
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let target = rtol * nb;
    let m = restart.min(n);
    let cap = 10 * n;
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut res = nb;
    let mut stalled = 0;
    let mut w = vec![0.0; n];

    while iterations < cap {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        scale(1.0 / res, &mut v0);
        basis.push(v0);
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = res;
        let mut k = 0;
        let mut inner_res = res;
        while k < m && iterations < cap {
            op.apply(&basis[k], &mut w);
            iterations += 1;
            for pass in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                    if pass == 0 {
                        h[(i, k)] = c;
                    } else {
                        h[(i, k)] += c;
                    }
                }
            }
            let hn = norm2(&w);
            h[(k + 1, k)] = hn;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let (a, bb) = (h[(k, k)], h[(k + 1, k)]);
            let rho = a.hypot(bb);
            if rho == 0.0 {
                return Err(Error::NoConvergence {
                    solver: "gmres",
                    reason: "singular Hessenberg".into(),
                });
            }
            cs[k] = a / rho;
            sn[k] = bb / rho;
            h[(k, k)] = rho;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            inner_res = g[k + 1].abs();
            k += 1;
            if inner_res <= target || hn == 0.0 {
                break;
            }
            let mut next = w.clone();
            scale(1.0 / hn, &mut next);
            basis.push(next);
        }
        // back substitution on the rotated triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut x);
        }
        // true residual for the restart
        op.apply(&x, &mut w);
        for (ri, (bi, wi)) in r.iter_mut().zip(b.iter().zip(&w)) {
            *ri = bi - wi;
        }
        let new_res = norm2(&r);
        if new_res <= target || inner_res <= target && new_res <= 10.0 * target {
            return Ok((x, iterations));
        }
        if new_res >= res * (1.0 - 1e-12) {
            stalled += 1;
            if stalled >= 3 {
                return Err(Error::NoConvergence {
                    solver: "gmres",
                    reason: format!("stagnated at relative residual {:e}", new_res / nb),
                });
            }
        } else {
            stalled = 0;
        }
        res = new_res;
    }
    Err(Error::NoConvergence {
        solver: "gmres",
        reason: format!("iteration cap {cap} reached"),
    })
}

/// How a non-Stieltjes target is reduced to a Stieltjes restart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PipelineKind {
    /// `A^{-3/2} b = A^{-1/2} (A^{-1} b)`, with CG (Hermitian) or GMRES first.
    InverseFirst,
    /// `A^{1/2} b = A^{-1/2} (A b)`.
    ProductFirst,
    /// `exp(-tau sqrt A) b = h(A) (A b) + b` with `h(s) = (exp(-tau sqrt s) - 1)/s`.
    ExpSqrt { tau: f64 },
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub x: Vec<f64>,
    /// Restart report; cycle matvec counts include the first phase.
    pub report: RestartReport,
    pub first_phase_matvecs: usize,
    pub matvecs: usize,
}

impl PipelineResult {
    pub fn first_phase_fraction(&self) -> f64 {
        self.first_phase_matvecs as f64 / self.matvecs as f64
    }
}

/// Runs a first phase (linear solve or one product), then the Stieltjes
/// restart. `reference` is the target `F(A) b`.
pub fn stieltjes_pipeline<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    kind: PipelineKind,
    cfg: &RestartConfig,
    solver_rtol: f64,
    reference: Option<&[f64]>,
) -> Result<PipelineResult> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let op = Counted::new(op);
    let c = match kind {
        PipelineKind::InverseFirst if op.is_hermitian() => cg_solve(&op, b, solver_rtol)?.0,
        PipelineKind::InverseFirst => gmres_solve(&op, b, solver_rtol, cfg.m)?.0,
        PipelineKind::ProductFirst | PipelineKind::ExpSqrt { .. } => {
            let mut c = vec![0.0; n];
            op.apply(b, &mut c);
            c
        }
    };
    let first = op.matvecs();
    let (x, mut report) = match kind {
        PipelineKind::ExpSqrt { tau } => {
            let inner: Option<Vec<f64>> =
                reference.map(|r| r.iter().zip(b).map(|(x, v)| x - v).collect());
            let (mut y, rep) = stieltjes_restart(&op, &c, &exp_sqrt_stieltjes(tau), cfg, inner.as_deref())?;
            axpy(1.0, b, &mut y);
            (y, rep)
        }
        _ => stieltjes_restart(&op, &c, &inv_sqrt_stieltjes(), cfg, reference)?,
    };
    for r in &mut report.records {
        r.matvecs += first;
    }
    report.matvecs += first;
    Ok(PipelineResult {
        x,
        report,
        first_phase_matvecs: first,
        matvecs: op.matvecs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{convection_diffusion_nd, laplacian_nd, DenseOperator, SparseMatrix};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn residual<O: LinearOperator>(op: &O, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; b.len()];
        op.apply(x, &mut ax);
        ax.iter().zip(b).map(|(a, bi)| (bi - a).powi(2)).sum::<f64>().sqrt() / norm2(b)
    }

    #[test]
    fn two_pass_equals_full_storage_on_diagonal() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let b = [1.0, 1.0, 1.0];
        let cfg = TwoPassConfig::new(1e-12, 1);
        let f = |s: f64| s.powf(-1.5);
        let (x, rep) = two_pass_lanczos(&a, &b, f, &cfg, None).unwrap();
        let y = full_lanczos(&a, &b, rep.iterations, f).unwrap();
        assert!(oracle::rel_err(&x, &y) <= 1e-12);
        assert!(oracle::rel_err(&x, &[1.0, 2f64.powf(-1.5), 3f64.powf(-1.5)]) <= 1e-12);
        assert_eq!(rep.matvecs, 2 * rep.iterations);
    }

    #[test]
    fn two_pass_matches_full_storage_on_laplacian() {
        let a = laplacian_nd(10, 2).unwrap();
        let b = random_vec(a.dim(), 1);
        let f = |s: f64| s.powf(-1.5);
        let cfg = TwoPassConfig::new(1e-8, 10);
        let (x, rep) = two_pass_lanczos(&a, &b, f, &cfg, None).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations % 10, 0);
        let y = full_lanczos(&a, &b, rep.iterations, f).unwrap();
        assert!(oracle::rel_err(&x, &y) <= 1e-10);
        let exact = oracle::sym_fn_vec(&a.to_dense(), f, &b);
        assert!(oracle::rel_err(&x, &exact) <= 1e-6);
    }

    #[test]
    fn two_pass_reference_error_is_exact() {
        let a = laplacian_nd(12, 2).unwrap();
        let b = random_vec(a.dim(), 2);
        let f = |s: f64| s.powf(-1.5);
        let exact = oracle::sym_fn_vec(&a.to_dense(), f, &b);
        let cfg = TwoPassConfig::new(1e-8, 10).with_stopping(StoppingMode::Reference);
        let (x, rep) = two_pass_lanczos(&a, &b, f, &cfg, Some(&exact)).unwrap();
        let direct = oracle::rel_err(&x, &exact);
        let tracked = rep.rel_error.unwrap();
        assert!(direct <= 1e-8);
        assert!((direct - tracked).abs() <= 1e-9, "{direct:e} vs {tracked:e}");
    }

    #[test]
    fn two_pass_rejects_non_hermitian() {
        let a = convection_diffusion_nd(4, 0.1, 2).unwrap();
        let cfg = TwoPassConfig::new(1e-8, 5);
        let b = vec![1.0; a.dim()];
        assert!(matches!(two_pass_lanczos(&a, &b, f64::sqrt, &cfg, None), Err(Error::NotHermitian)));
    }

    #[test]
    fn cg_identity_in_one_step() {
        let a = SparseMatrix::identity(5);
        let b = random_vec(5, 3);
        let (x, it) = cg_solve(&a, &b, 1e-12).unwrap();
        assert_eq!(it, 1);
        assert!(oracle::rel_err(&x, &b) <= 1e-15);
    }

    #[test]
    fn cg_residual_contract() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = SparseMatrix::diagonal(&d);
        let b = random_vec(10, 4);
        let (x, _) = cg_solve(&a, &b, 1e-10).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-10);
        let a = laplacian_nd(10, 3).unwrap();
        let b = vec![1.0; a.dim()];
        let (x, _) = cg_solve(&a, &b, 1e-9).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-9);
    }

    #[test]
    fn cg_reports_indefinite() {
        let a = SparseMatrix::diagonal(&[1.0, -1.0]);
        assert!(cg_solve(&a, &[1.0, 1.0], 1e-10).is_err());
    }

    #[test]
    fn gmres_identity_and_diagonal() {
        let a = SparseMatrix::identity(6);
        let b = random_vec(6, 5);
        let (x, it) = gmres_solve(&a, &b, 1e-12, 4).unwrap();
        assert_eq!(it, 1);
        assert!(oracle::rel_err(&x, &b) <= 1e-14);
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = SparseMatrix::diagonal(&d);
        let (x, _) = gmres_solve(&a, &b.repeat(2)[..10], 1e-10, 3).unwrap();
        assert!(residual(&a, &x, &b.repeat(2)[..10]) <= 1e-10);
    }

    #[test]
    fn gmres_convection_diffusion() {
        let a = convection_diffusion_nd(10, 1e-3, 3).unwrap();
        let b = vec![1.0; a.dim()];
        let (x, _) = gmres_solve(&a, &b, 1e-9, 50).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-9);
    }

    #[test]
    fn gmres_dense_nonsymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DMatrix::from_fn(20, 20, |i, j| if i == j { 4.0 } else { rng.random_range(-0.3..0.3) });
        let op = DenseOperator::new(m).unwrap();
        let b = random_vec(20, 10);
        let (x, _) = gmres_solve(&op, &b, 1e-11, 5).unwrap();
        assert!(residual(&op, &x, &b) <= 1e-11);
    }

    #[test]
    fn pipelines_match_dense_functions() {
        let a = laplacian_nd(6, 2).unwrap();
        let b = random_vec(a.dim(), 61);
        let ad = a.to_dense();
        let cfg = RestartConfig::new(10, 1e-9);
        let cases: [(PipelineKind, Box<dyn Fn(f64) -> f64>); 3] = [
            (PipelineKind::InverseFirst, Box::new(|l: f64| l.powf(-1.5))),
            (PipelineKind::ProductFirst, Box::new(f64::sqrt)),
            (PipelineKind::ExpSqrt { tau: 0.7 }, Box::new(|l: f64| (-0.7 * l.sqrt()).exp())),
        ];
        for (kind, f) in cases {
            let want = oracle::sym_fn_vec(&ad, f, &b);
            let out = stieltjes_pipeline(&a, &b, kind, &cfg, 1e-12, None).unwrap();
            assert!(oracle::rel_err(&out.x, &want) <= 1e-7, "{kind:?}: {:e}", oracle::rel_err(&out.x, &want));
            assert_eq!(out.matvecs, out.report.matvecs);
            assert_eq!(out.report.records.last().unwrap().matvecs, out.matvecs);
            let frac = out.first_phase_fraction();
            assert!(frac > 0.0 && frac < 1.0);
        }
    }

    #[test]
    fn nonsymmetric_pipeline_uses_gmres() {
        let a = convection_diffusion_nd(5, 0.1, 2).unwrap();
        let b = random_vec(a.dim(), 62);
        let cfg = RestartConfig::new(10, 1e-8);
        let out = stieltjes_pipeline(&a, &b, PipelineKind::InverseFirst, &cfg, 1e-11, None).unwrap();
        // A^{3/2} x = b checked through A^{1/2} = A A^{-1/2}
        let ad = a.to_dense();
        let half = &ad * crate::reference::inverse_sqrt(&ad).unwrap();
        let back = &ad * (&half * DVector::from_column_slice(&out.x));
        assert!(oracle::rel_err(back.as_slice(), &b) <= 1e-6);
    }
}
