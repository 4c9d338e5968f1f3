//! Not-a-knot cubic spline interpolation with polynomial extrapolation.

use crate::error::{Error, Result};

/// Piecewise cubic; piece `i` is stored as coefficients of powers of
/// `x - x_i` and also serves as the extrapolant beyond the end knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

impl CubicSpline {
    /// Interpolates `(x_i, y_i)`. Needs at least two strictly ascending
    /// knots; two knots give a line, three a parabola.
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let q = x.len();
        if y.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                actual: y.len(),
            });
        }
        if q < 2 {
            return Err(Error::InvalidArgument("spline needs at least two knots".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("spline knots must be strictly ascending".into()));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spline data"));
        }
        let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..q - 1).map(|i| (y[i + 1] - y[i]) / dx[i]).collect();
        let slopes = match q {
            2 => vec![delta[0]; 2],
            3 => {
                // derivative of the interpolating parabola
                let c = (delta[1] - delta[0]) / (x[2] - x[0]);
                vec![
                    delta[0] - c * dx[0],
                    delta[0] + c * dx[0],
                    delta[1] + c * dx[1],
                ]
            }
            _ => not_a_knot_slopes(x, &dx, &delta),
        };
        let coeffs = (0..q - 1)
            .map(|i| {
                let h = dx[i];
                let (s0, s1) = (slopes[i], slopes[i + 1]);
                [
                    y[i],
                    s0,
                    (3.0 * delta[i] - 2.0 * s0 - s1) / h,
                    (s0 + s1 - 2.0 * delta[i]) / (h * h),
                ]
            })
            .collect();
        Ok(Self {
            knots: x.to_vec(),
            coeffs,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn piece(&self, x: f64) -> usize {
        let last = self.coeffs.len() - 1;
        self.knots.partition_point(|&k| k <= x).saturating_sub(1).min(last)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.piece(x);
        let [a, b, c, d] = self.coeffs[i];
        let u = x - self.knots[i];
        a + u * (b + u * (c + u * d))
    }

    /// Derivative of the given order (1, 2 or 3) at `x`, taken from the
    /// piece that owns `x`.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.derivative_on(self.piece(x), x, order)
    }

    fn derivative_on(&self, i: usize, x: f64, order: usize) -> f64 {
        let [_, b, c, d] = self.coeffs[i];
        let u = x - self.knots[i];
        match order {
            0 => self.eval(x),
            1 => b + u * (2.0 * c + 3.0 * u * d),
            2 => 2.0 * c + 6.0 * u * d,
            3 => 6.0 * d,
            _ => 0.0,
        }
    }
}

fn not_a_knot_slopes(x: &[f64], dx: &[f64], delta: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];

    let x31 = x[2] - x[0];
    diag[0] = dx[1];
    sup[0] = x31;
    rhs[0] = ((dx[0] + 2.0 * x31) * dx[1] * delta[0] + dx[0] * dx[0] * delta[1]) / x31;
    for i in 1..n - 1 {
        sub[i - 1] = dx[i];
        diag[i] = 2.0 * (dx[i - 1] + dx[i]);
        sup[i] = dx[i - 1];
        rhs[i] = 3.0 * (dx[i] * delta[i - 1] + dx[i - 1] * delta[i]);
    }
    let xn = x[n - 1] - x[n - 3];
    sub[n - 2] = xn;
    diag[n - 1] = dx[n - 3];
    rhs[n - 1] = ((dx[n - 2] + 2.0 * xn) * dx[n - 3] * delta[n - 2]
        + dx[n - 2] * dx[n - 2] * delta[n - 3])
        / xn;
    solve_tridiagonal(sub, diag, sup, rhs)
}

/// Gaussian elimination with partial pivoting for a tridiagonal system.
fn solve_tridiagonal(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
        dl[i] = 0.0;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    b
}

/// Inserts the midpoint of every pair of neighbouring knots.
pub fn refine_nodes(knots: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * knots.len().max(1) - 1);
    for w in knots.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = knots.last() {
        out.push(last);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_err(s: &CubicSpline, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (0..=4000)
            .map(|k| a + (b - a) * k as f64 / 4000.0)
            .map(|x| (s.eval(x) - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn reproduces_cubic_everywhere() {
        let f = |t: f64| t * t * t - t;
        let x = [-1.0, -0.3, 0.2, 0.9, 1.4, 2.0];
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::fit(&x, &y).unwrap();
        for k in 0..=100 {
            let t = -3.0 + 7.0 * k as f64 / 100.0;
            assert!((s.eval(t) - f(t)).abs() < 1e-11 * (1.0 + f(t).abs()));
        }
    }

    #[test]
    fn constant_data() {
        let s = CubicSpline::fit(&[0.0, 1.0, 3.0, 4.0, 7.0], &[2.5; 5]).unwrap();
        for t in [-2.0, 0.5, 3.3, 9.0] {
            assert!((s.eval(t) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn low_knot_counts() {
        let s = CubicSpline::fit(&[0.0, 2.0], &[1.0, 5.0]).unwrap();
        assert!((s.eval(3.0) - 7.0).abs() < 1e-14);
        let f = |t: f64| 2.0 * t * t - t + 1.0;
        let x = [0.0, 0.5, 3.0];
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::fit(&x, &y).unwrap();
        for t in [-1.0, 0.25, 2.0, 5.0] {
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(CubicSpline::fit(&[1.0], &[1.0]).is_err());
        assert!(CubicSpline::fit(&[0.0, 1.0, 1.0, 2.0], &[0.0; 4]).is_err());
        assert!(CubicSpline::fit(&[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn continuity_and_not_a_knot() {
        let x = [0.0, 0.4, 1.1, 1.5, 2.6, 3.0, 4.2];
        let y: Vec<f64> = x.iter().map(|t: &f64| (t * 1.3).sin() + 0.1 * t).collect();
        let s = CubicSpline::fit(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() <= 1e-12 * yi.abs().max(1.0));
        }
        for i in 1..x.len() - 1 {
            for order in 1..=2 {
                let left = s.derivative_on(i - 1, x[i], order);
                let right = s.derivative_on(i, x[i], order);
                assert!((left - right).abs() <= 1e-9 * left.abs().max(1.0), "order {order} at {i}");
            }
        }
        let q = x.len();
        assert!((s.derivative_on(0, x[1], 3) - s.derivative_on(1, x[1], 3)).abs() < 1e-9);
        assert!((s.derivative_on(q - 3, x[q - 2], 3) - s.derivative_on(q - 2, x[q - 2], 3)).abs() < 1e-9);
    }

    #[test]
    fn refine_nodes_counts() {
        assert_eq!(refine_nodes(&[0.0, 1.0]), vec![0.0, 0.5, 1.0]);
        let k: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        assert_eq!(refine_nodes(&k).len(), 13);
    }

    #[test]
    fn exponential_error_scale() {
        let f = |t: f64| (-t).exp();
        let x: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::fit(&x, &y).unwrap();
        let e = max_err(&s, f, 0.0, 4.0);
        // the not-a-knot bound scales like h^4 times a moderate constant
        assert!(e < 0.5f64.powi(4) * 0.05 && e > 0.5f64.powi(4) * 1e-4, "{e}");
    }

    #[test]
    fn refinement_ratio_near_sixteen() {
        let f = |t: f64| (-t).exp();
        let mut x: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let mut prev = None;
        for _ in 0..4 {
            let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
            let e = max_err(&CubicSpline::fit(&x, &y).unwrap(), f, 0.0, 4.0);
            if let Some(p) = prev {
                let ratio: f64 = p / e;
                assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
            }
            prev = Some(e);
            x = refine_nodes(&x);
        }
    }

    #[test]
    fn pivoting_solver_matches_dense() {
        let dl = vec![5.0, 1.0, 0.5];
        let d = vec![1e-3, 2.0, 3.0, 1.0];
        let du = vec![1.0, 4.0, 1.0];
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(dl.clone(), d.clone(), du.clone(), b.clone());
        let mut a = nalgebra::DMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = d[i];
            if i < 3 {
                a[(i + 1, i)] = dl[i];
                a[(i, i + 1)] = du[i];
            }
        }
        let want = a.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for i in 0..4 {
            assert!((x[i] - want[i]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn interpolates_and_extrapolates_smoothly(
            gaps in proptest::collection::vec(0.05f64..2.0, 4..20),
            seed in 0u64..1000,
        ) {
            let mut x = vec![0.0];
            for g in &gaps {
                x.push(x.last().unwrap() + g);
            }
            let y: Vec<f64> = x.iter().enumerate().map(|(i, t)| (t + seed as f64).sin() + i as f64 * 0.01).collect();
            let s = CubicSpline::fit(&x, &y).unwrap();
            for (xi, yi) in x.iter().zip(&y) {
                prop_assert!((s.eval(*xi) - yi).abs() <= 1e-10 * yi.abs().max(1.0));
            }
            let (a, b) = (x[0], *x.last().unwrap());
            let eps = 1e-7;
            for order in 0..=2 {
                prop_assert!((s.derivative(a - eps, order) - s.derivative(a + eps, order)).abs() < 1e-4);
                prop_assert!((s.derivative(b - eps, order) - s.derivative(b + eps, order)).abs() < 1e-4);
            }
        }
    }
}
