//! Adaptive Gauss–Kronrod (G7/K15) quadrature on the half line and the
//! frozen node/weight rules used by the restart engine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::smallmat::{expm_e1_batch, SpectralCache};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the Kronrod abscissae with odd index 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

pub const DEFAULT_MAX_INTERVALS: usize = 2000;
const INITIAL_INTERVALS: usize = 10;

/// The 15 Kronrod abscissae on `[a, b]` in ascending order, with Kronrod
/// and embedded Gauss weights (zero for Kronrod-only points).
pub fn gk15_points(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] * r } else { 0.0 };
        out[k] = (c - r * XGK[k], WGK[k] * r, wg);
        out[14 - k] = (c + r * XGK[k], WGK[k] * r, wg);
    }
    out[7] = (c, WGK[7] * r, WG[3] * r);
    out
}

/// Kronrod estimate of the integral of `phi` over `[a, b]` and the
/// difference to the embedded Gauss estimate.
pub fn gk15(phi: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    let (mut k, mut g) = (0.0, 0.0);
    for (x, wk, wg) in gk15_points(a, b) {
        let v = phi(x);
        if !v.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        k += wk * v;
        g += wg * v;
    }
    Ok((k, (k - g).abs()))
}

/// Maps `x in [0, 1)` to `t = (x / (1 - x))^2` and returns `(t, dt/dx)`.
#[inline]
pub fn half_line_map(x: f64) -> (f64, f64) {
    let y = 1.0 - x;
    let s = x / y;
    (s * s, 2.0 * x / (y * y * y))
}

/// Tolerances for the adaptive driver. An interval of width `w` (in the
/// mapped variable, total width 1) is accepted when its error estimate is
/// at most `max(rel * |Q|, abs) * w`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            max_intervals: DEFAULT_MAX_INTERVALS,
        }
    }

    fn target(&self, total: f64) -> f64 {
        (self.rel * total.abs()).max(self.abs)
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Vector-valued G7/K15 on `[a, b]` in the mapped variable.
fn panel_vec<F>(phi: &mut F, a: f64, b: f64) -> Result<Panel<Vec<f64>>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let mut k: Vec<f64> = Vec::new();
    let mut g: Vec<f64> = Vec::new();
    for (x, wk, wg) in gk15_points(a, b) {
        let v = phi(x)?;
        if k.is_empty() {
            k = vec![0.0; v.len()];
            g = vec![0.0; v.len()];
        }
        for (i, vi) in v.iter().enumerate() {
            if !vi.is_finite() {
                return Err(Error::NonFinite("quadrature integrand"));
            }
            k[i] += wk * vi;
            g[i] += wg * vi;
        }
    }
    let error = k.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(Panel { a, b, value: k, error })
}

/// Adaptive subdivision on `x in [0, 1)` for a vector integrand given in
/// the mapped variable. Bisects the panel with the largest error first
/// until every panel meets the target. Returns the accepted panels sorted by position.
fn adapt_vec<F>(mut phi: F, tol: Tolerance) -> Result<(Vec<Panel<Vec<f64>>>, Vec<f64>, f64)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let mut heap = BinaryHeap::new();
    let mut total: Vec<f64> = Vec::new();
    for i in 0..INITIAL_INTERVALS {
        let a = i as f64 / INITIAL_INTERVALS as f64;
        let b = (i + 1) as f64 / INITIAL_INTERVALS as f64;
        let p = panel_vec(&mut phi, a, b)?;
        if total.is_empty() {
            total = vec![0.0; p.value.len()];
        }
        for (t, v) in total.iter_mut().zip(&p.value) {
            *t += v;
        }
        heap.push(p);
    }
    loop {
        let norm = total.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = tol.target(norm);
        let worst = heap.peek().expect("at least one panel");
        if worst.error <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            let estimate = heap.iter().map(|p| p.error).sum();
            return Err(Error::QuadratureDivergence {
                intervals: heap.len(),
                estimate,
                target,
            });
        }
        let p = heap.pop().expect("peeked");
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::QuadratureDivergence {
                intervals: heap.len() + 1,
                estimate: p.error,
                target,
            });
        }
        let left = panel_vec(&mut phi, p.a, mid)?;
        let right = panel_vec(&mut phi, mid, p.b)?;
        for i in 0..total.len() {
            total[i] += left.value[i] + right.value[i] - p.value[i];
        }
        heap.push(left);
        heap.push(right);
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    // re-add in order so the result does not depend on the subdivision history
    let mut sum = vec![0.0; total.len()];
    for p in &panels {
        for (s, v) in sum.iter_mut().zip(&p.value) {
            *s += v;
        }
    }
    let err = panels.iter().map(|p| p.error).sum();
    Ok((panels, sum, err))
}

/// Integral over `[0, inf)` of a vector-valued `phi(t)`; returns the value
/// and the summed error estimate.
pub fn integrate_half_line_vec<F>(mut phi: F, tol: Tolerance) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let (_, value, err) = adapt_vec(
        |x| {
            let (t, dt) = half_line_map(x);
            let mut v = phi(t)?;
            for vi in v.iter_mut() {
                *vi = if *vi == 0.0 { 0.0 } else { *vi * dt };
            }
            Ok(v)
        },
        tol,
    )?;
    Ok((value, err))
}

/// Nodes and weights for integrals over `[0, inf)`: `sum w_i phi(t_i)`
/// approximates the integral of `phi`. Nodes ascend strictly.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    eps_q: f64,
    nu: f64,
    value: f64,
    error_estimate: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eps_q(&self) -> f64 {
        self.eps_q
    }

    /// The spectral anchor the rule was built for.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// The adaptive integral the rule was built from.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// `sum_i w_i phi(t_i)`
    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| {
                let v = phi(t);
                if v == 0.0 {
                    0.0
                } else {
                    w * v
                }
            })
            .sum()
    }
}

/// Builds a half-line rule from the adaptive integration of `phi(t)`.
/// The rule stores every Kronrod node of every accepted panel.
pub fn build_half_line_rule(
    phi: impl Fn(f64) -> f64,
    tol: Tolerance,
    nu: f64,
) -> Result<QuadratureRule> {
    let (panels, value, err) = adapt_vec(
        |x| {
            let (t, dt) = half_line_map(x);
            let v = phi(t);
            Ok(vec![if v == 0.0 { 0.0 } else { v * dt }])
        },
        tol,
    )?;
    let mut nodes = Vec::with_capacity(15 * panels.len());
    let mut weights = Vec::with_capacity(15 * panels.len());
    for p in &panels {
        for (x, wk, _) in gk15_points(p.a, p.b) {
            let (t, dt) = half_line_map(x);
            nodes.push(t);
            weights.push(wk * dt);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        eps_q: tol.rel,
        nu,
        value: value[0],
        error_estimate: err,
    })
}

/// Rule for `L{f}(nu)`, built from `f(t) e^{-nu t}` with relative and
/// absolute target `eps_q`. The exponential factor is not part of the
/// weights. Nodes where `f` vanishes contribute nothing and skip the
/// exponential, so kernels with super-exponential decay tolerate negative
/// anchors.
pub fn build_laplace_rule(f: impl Fn(f64) -> f64, nu: f64, eps_q: f64) -> Result<QuadratureRule> {
    build_laplace_rule_with(f, nu, Tolerance::new(eps_q, eps_q))
}

pub fn build_laplace_rule_with(
    f: impl Fn(f64) -> f64,
    nu: f64,
    tol: Tolerance,
) -> Result<QuadratureRule> {
    if !(tol.rel > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    build_half_line_rule(|t| anchored(f(t), nu, t), tol, nu)
}

#[inline]
pub(crate) fn anchored(v: f64, nu: f64, t: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * (-nu * t).exp()
    }
}

/// `sum_i w_i values_i exp(-t_i H) e_1`, skipping zero coefficients.
pub fn apply_rule_matrix(
    rule: &QuadratureRule,
    values: &[f64],
    h: &DMatrix<f64>,
    cache: Option<&SpectralCache>,
) -> Result<DVector<f64>> {
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            actual: values.len(),
        });
    }
    let coeffs: Vec<f64> = rule.weights.iter().zip(values).map(|(w, v)| w * v).collect();
    weighted_exp_sum(h, cache, &rule.nodes, &coeffs).map(|(sum, _)| sum)
}

/// `sum_i c_i exp(-t_i H) e_1` together with `e_m^T exp(-t_i H) e_1` per
/// node (zero where the coefficient vanishes and the product is skipped).
pub(crate) fn weighted_exp_sum(
    h: &DMatrix<f64>,
    cache: Option<&SpectralCache>,
    nodes: &[f64],
    coeffs: &[f64],
) -> Result<(DVector<f64>, Vec<f64>)> {
    let m = h.nrows();
    let active: Vec<usize> = (0..nodes.len()).filter(|&i| coeffs[i] != 0.0).collect();
    let ts: Vec<f64> = active.iter().map(|&i| nodes[i]).collect();
    let cols = expm_e1_batch(h, &ts, cache)?;
    let mut sum = DVector::zeros(m);
    let mut last = vec![0.0; nodes.len()];
    for (&i, col) in active.iter().zip(&cols) {
        sum.axpy(coeffs[i], col, 1.0);
        last[i] = col[m - 1];
    }
    if sum.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("quadrature sum"));
    }
    Ok((sum, last))
}
