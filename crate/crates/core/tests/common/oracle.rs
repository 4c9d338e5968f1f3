//! Independent reference computations for tests: double-exponential
//! quadrature, brute-force trapezoid sums and dense spectral functions.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use std::f64::consts::FRAC_PI_2;

/// Trapezoid rule with `n` panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

/// Tanh-sinh quadrature on `[a, b]`; tolerates endpoint singularities.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let r = 0.5 * (b - a);
    let term = |u: f64| {
        let s = FRAC_PI_2 * u.sinh();
        let x = s.tanh();
        let w = FRAC_PI_2 * u.cosh() / s.cosh().powi(2);
        // distance to the nearer endpoint, computed without cancellation
        let d = r / (s.abs().exp() * s.cosh());
        let t = if x < 0.0 { a + d } else { b - d };
        if d <= 0.0 || t <= a || t >= b {
            return 0.0;
        }
        r * w * f(t)
    };
    de_trapezoid(term, tol)
}

/// Exp-sinh quadrature on `[0, inf)`.
pub fn exp_sinh(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let term = |u: f64| {
        let t = (FRAC_PI_2 * u.sinh()).exp();
        if t == 0.0 || !t.is_finite() {
            return 0.0;
        }
        let w = FRAC_PI_2 * u.cosh() * t;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            w * v
        }
    };
    de_trapezoid(term, tol)
}

/// Integral of `f(t) e^{-s t}` over the half line.
pub fn laplace(f: impl Fn(f64) -> f64, s: f64, tol: f64) -> f64 {
    exp_sinh(
        |t| {
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * (-s * t).exp()
            }
        },
        tol,
    )
}

fn de_trapezoid(term: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let umax = 4.5;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= umax {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut est = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= umax {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let next = h * sum;
        if (next - est).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        est = next;
    }
    est
}

/// Applies a scalar function to a symmetric matrix through its eigendecomposition.
pub fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn sym_fn_vec(a: &DMatrix<f64>, f: impl Fn(f64) -> f64, b: &[f64]) -> Vec<f64> {
    (sym_fn(a, f) * DVector::from_column_slice(b)).as_slice().to_vec()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}
