//! The recursive error functions `f^(k)` of the restarted Laplace method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{anchored, build_laplace_rule_with, QuadratureRule, Tolerance};
use crate::smallmat::{unit, SpectralCache};
use crate::spline::{refine_nodes, CubicSpline};

use super::kernels::Kernel;
use super::RulePolicy;

const MAX_REFINEMENTS: usize = 5;
const MIDPOINT_REFINEMENTS: usize = 3;

enum Inner {
    Exact(Kernel),
    Spline(CubicSpline),
}

impl Inner {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Inner::Exact(k) => k(t),
            Inner::Spline(s) => s.eval(t),
        }
    }
}

/// `f^(k)` as an evaluable function: the raw kernel at `k = 1`, afterwards
/// `sum_j c_j s(t + t_j)` with `s` the exact kernel or a spline of `f^(k-1)`.
/// Every `f^(k)` vanishes where the kernel does, so evaluations at or beyond
/// `support` return zero instead of spline noise.
enum Level {
    Raw(Kernel),
    Convolved {
        inner: Inner,
        shifts: Vec<f64>,
        coeffs: Vec<f64>,
        support: f64,
    },
}

impl Level {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Level::Raw(k) => k(t),
            Level::Convolved {
                inner,
                shifts,
                coeffs,
                support,
            } => {
                if t >= *support {
                    return 0.0;
                }
                shifts
                    .iter()
                    .zip(coeffs)
                    .map(|(&s, &c)| {
                        if t + s >= *support {
                            return 0.0;
                        }
                        let v = inner.eval(t + s);
                        if v == 0.0 {
                            0.0
                        } else {
                            c * v
                        }
                    })
                    .sum()
            }
        }
    }
}

/// First node past the last nonzero kernel value, or infinity when the kernel
/// is nonzero on the last node.
fn kernel_support(nodes: &[f64], values: &[f64]) -> f64 {
    match values.iter().rposition(|&v| v != 0.0) {
        Some(l) if l + 1 < nodes.len() => nodes[l + 1],
        Some(_) => f64::INFINITY,
        None => 0.0,
    }
}

/// Per-cycle diagnostics of one chain.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainStats {
    pub rule_len: usize,
    pub spline_knots: usize,
    pub refinements: usize,
    pub spline_converged: bool,
}

/// Columns `exp(-t_i H) e_1` where requested.
fn exp_columns(
    h: &DMatrix<f64>,
    cache: Option<&SpectralCache>,
    nodes: &[f64],
    need: &[bool],
) -> Result<Vec<Option<DVector<f64>>>> {
    let e1 = unit(h.nrows(), 0);
    nodes
        .iter()
        .zip(need)
        .map(|(&t, &n)| {
            if !n {
                return Ok(None);
            }
            let col = match cache {
                Some(c) => c.exp_e1(t),
                None => crate::smallmat::expm_action(h, &e1, t, None)?,
            };
            Ok(Some(col))
        })
        .collect()
}

/// Nodes needing `exp(-t H) e_1`: every node with a nonzero value and every
/// node before the last such node. The tail where the kernel underflowed is
/// skipped, which keeps growing exponentials of `-H` out of reach.
fn needed(values: &[f64]) -> Vec<bool> {
    let last = values.iter().rposition(|&v| v != 0.0);
    (0..values.len()).map(|i| last.is_some_and(|l| i <= l)).collect()
}

fn weighted(
    cols: &[Option<DVector<f64>>],
    weights: &[f64],
    values: &[f64],
    m: usize,
) -> DVector<f64> {
    let mut y = DVector::zeros(m);
    for ((c, w), v) in cols.iter().zip(weights).zip(values) {
        if let Some(c) = c {
            if *v != 0.0 {
                y.axpy(w * v, c, 1.0);
            }
        }
    }
    y
}

fn last_entries(cols: &[Option<DVector<f64>>], m: usize) -> Vec<f64> {
    cols.iter().map(|c| c.as_ref().map_or(0.0, |c| c[m - 1])).collect()
}

/// State of one error chain after cycle `k`.
pub(crate) struct ErrorChain {
    level: Level,
    support: f64,
    rule: QuadratureRule,
    first_rule: QuadratureRule,
    values: Vec<f64>,
    g: Vec<f64>,
    nu: f64,
    beta: f64,
    sigma: f64,
    h_prev: f64,
    eps_q: f64,
    eps_s: f64,
    policy: RulePolicy,
}

pub(crate) struct ChainParams {
    pub nu: f64,
    pub beta: f64,
    pub eps_q: f64,
    pub eps_s: f64,
    pub policy: RulePolicy,
}

impl ErrorChain {
    /// Cycle one: `y = sum_i w_i f(t_i) exp(-t_i H) e_1` with the given rule.
    /// Returns the chain and the unscaled `y` (the caller multiplies by `beta`).
    pub fn start(
        kernel: Kernel,
        rule: QuadratureRule,
        h: &DMatrix<f64>,
        cache: Option<&SpectralCache>,
        h_next: f64,
        p: ChainParams,
    ) -> Result<(Self, DVector<f64>)> {
        let m = h.nrows();
        let values: Vec<f64> = rule.nodes().iter().map(|&t| kernel(t)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel at quadrature node"));
        }
        let cols = exp_columns(h, cache, rule.nodes(), &needed(&values))?;
        let y = weighted(&cols, rule.weights(), &values, m);
        let g = last_entries(&cols, m);
        let chain = Self {
            support: kernel_support(rule.nodes(), &values),
            level: Level::Raw(kernel),
            first_rule: rule.clone(),
            rule,
            values,
            g,
            nu: p.nu,
            beta: p.beta,
            sigma: 1.0,
            h_prev: h_next,
            eps_q: p.eps_q,
            eps_s: p.eps_s,
            policy: p.policy,
        };
        Ok((chain, y))
    }

    /// Cycle one when the caller computed the update itself; `g` holds
    /// `e_m^T exp(-t_i H) e_1` on the rule nodes.
    pub fn start_with_g(
        kernel: Kernel,
        rule: QuadratureRule,
        g: Vec<f64>,
        h_next: f64,
        p: ChainParams,
    ) -> Result<Self> {
        let values: Vec<f64> = rule.nodes().iter().map(|&t| kernel(t)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel at quadrature node"));
        }
        Ok(Self {
            support: kernel_support(rule.nodes(), &values),
            level: Level::Raw(kernel),
            first_rule: rule.clone(),
            rule,
            values,
            g,
            nu: p.nu,
            beta: p.beta,
            sigma: 1.0,
            h_prev: h_next,
            eps_q: p.eps_q,
            eps_s: p.eps_s,
            policy: p.policy,
        })
    }

    /// `f^(k)(t)` of the current level.
    pub fn error_function(&self, t: f64) -> f64 {
        self.sigma * self.level.eval(t)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cycle `k + 1`: returns the scaled small update
    /// `beta_{k+1} sum_i w_i f^(k+1)(t_i) exp(-t_i H) e_1`.
    pub fn advance(
        &mut self,
        h: &DMatrix<f64>,
        cache: Option<&SpectralCache>,
        h_next: f64,
        iterate_norm: f64,
    ) -> Result<(DVector<f64>, ChainStats)> {
        let m = h.nrows();
        let beta_new = -self.beta * self.h_prev;
        let mut stats = ChainStats::default();

        // convolution weights c_j = w_j g^(k)(t_j) on the previous rule
        let (shifts, coeffs): (Vec<f64>, Vec<f64>) = self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.g)
            .filter(|(_, &g)| g != 0.0)
            .map(|((&t, &w), &g)| (t, w * g))
            .unzip();

        if shifts.is_empty() || beta_new == 0.0 {
            return Ok(self.finish_zero(beta_new, h_next, m));
        }

        // outer nodes for the refinement test: the previous rule
        let outer_nodes = self.rule.nodes().to_vec();
        let outer_weights = self.rule.weights().to_vec();
        let support = self.support;
        let eval_on = |inner: &Inner, ts: &[f64]| -> Vec<f64> {
            ts.iter()
                .map(|&t| {
                    shifts
                        .iter()
                        .zip(&coeffs)
                        .map(|(&s, &c)| {
                            if t + s >= support {
                                return 0.0;
                            }
                            let v = inner.eval(t + s);
                            if v == 0.0 {
                                0.0
                            } else {
                                c * v
                            }
                        })
                        .sum()
                })
                .collect()
        };

        let (inner, outer_values, outer_cols) = match &self.level {
            Level::Raw(k) => {
                let inner = Inner::Exact(k.clone());
                let vals = eval_on(&inner, &outer_nodes);
                (inner, vals, None)
            }
            Level::Convolved { .. } => {
                let cols = exp_columns(h, cache, &outer_nodes, &needed(&self.values))?;
                let scale = (beta_new * self.sigma).abs();
                let mut knots = outer_nodes.clone();
                let mut kv = self.values.clone();
                let mut spline = CubicSpline::fit(&knots, &kv)?;
                let mut vals = eval_on(&Inner::Spline(spline.clone()), &outer_nodes);
                let mut y_prev = weighted(&cols, &outer_weights, &vals, m);
                let mut converged = false;
                for round in 1..=MAX_REFINEMENTS {
                    let pairwise = round > MIDPOINT_REFINEMENTS;
                    let next = if pairwise {
                        pairwise_knots(&outer_nodes, &knots)
                    } else {
                        refine_nodes(&knots)
                    };
                    kv = self.extend_values(&knots, &kv, &next);
                    knots = next;
                    spline = CubicSpline::fit(&knots, &kv)?;
                    vals = eval_on(&Inner::Spline(spline.clone()), &outer_nodes);
                    let y = weighted(&cols, &outer_weights, &vals, m);
                    stats.refinements = round;
                    let diff = scale * (&y - &y_prev).norm();
                    y_prev = y;
                    // pairwise knots make the spline exact at every t_i + t_j
                    if diff <= self.eps_s * iterate_norm || pairwise {
                        converged = true;
                        break;
                    }
                }
                stats.spline_knots = knots.len();
                stats.spline_converged = converged;
                (Inner::Spline(spline), vals, Some(cols))
            }
        };
        if matches!(inner, Inner::Exact(_)) {
            stats.spline_converged = true;
        }

        let mut level = Level::Convolved {
            inner,
            shifts: shifts.clone(),
            coeffs: coeffs.clone(),
            support,
        };

        let (rule, mut values, cols) = match self.policy {
            RulePolicy::Freeze => {
                let rule = self.first_rule.clone();
                let same = rule.nodes() == outer_nodes.as_slice();
                let values = if same {
                    outer_values
                } else {
                    rule.nodes().iter().map(|&t| level.eval(t)).collect()
                };
                let cols = match (same, outer_cols) {
                    (true, Some(c)) => c,
                    _ => exp_columns(h, cache, rule.nodes(), &needed(&values))?,
                };
                (rule, values, cols)
            }
            RulePolicy::Rebuild => {
                let nu = self.nu;
                let s: f64 = outer_nodes
                    .iter()
                    .zip(&outer_weights)
                    .zip(&outer_values)
                    .map(|((&t, &w), &v)| (w * anchored(v, nu, t)).abs())
                    .sum();
                if s == 0.0 || !s.is_finite() {
                    return Ok(self.finish_zero(beta_new, h_next, m));
                }
                let tol = Tolerance::new(self.eps_q, self.eps_q * s);
                let rule = build_laplace_rule_with(|t| level.eval(t), nu, tol)?;
                let values: Vec<f64> = rule.nodes().iter().map(|&t| level.eval(t)).collect();
                let cols = exp_columns(h, cache, rule.nodes(), &needed(&values))?;
                (rule, values, cols)
            }
        };

        let sigma_step = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if sigma_step == 0.0 || !sigma_step.is_finite() {
            if !sigma_step.is_finite() {
                return Err(Error::NonFinite("error function values"));
            }
            return Ok(self.finish_zero(beta_new, h_next, m));
        }
        for v in values.iter_mut() {
            *v /= sigma_step;
        }
        if let Level::Convolved { coeffs, .. } = &mut level {
            for c in coeffs.iter_mut() {
                *c /= sigma_step;
            }
        }
        let y = weighted(&cols, rule.weights(), &values, m);
        let g = last_entries(&cols, m);

        self.sigma *= sigma_step;
        self.beta = beta_new;
        self.h_prev = h_next;
        self.level = level;
        self.rule = rule;
        self.values = values;
        self.g = g;
        stats.rule_len = self.rule.len();
        let scale = self.beta * self.sigma;
        Ok((y * scale, stats))
    }

    fn finish_zero(&mut self, beta_new: f64, h_next: f64, m: usize) -> (DVector<f64>, ChainStats) {
        self.beta = beta_new;
        self.h_prev = h_next;
        self.g.iter_mut().for_each(|g| *g = 0.0);
        (
            DVector::zeros(m),
            ChainStats {
                rule_len: self.rule.len(),
                spline_converged: true,
                ..Default::default()
            },
        )
    }

    /// Values of the current `f^(k)` on `next`, reusing those known on `knots`.
    fn extend_values(&self, knots: &[f64], values: &[f64], next: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(next.len());
        let mut j = 0;
        for &t in next {
            while j < knots.len() && knots[j] < t {
                j += 1;
            }
            if j < knots.len() && knots[j] == t {
                out.push(values[j]);
            } else {
                out.push(self.level.eval(t));
            }
        }
        out
    }
}

/// Knots `t_i + t_j` (i <= j) merged with the current knots.
fn pairwise_knots(nodes: &[f64], knots: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = knots.to_vec();
    for i in 0..nodes.len() {
        for j in i..nodes.len() {
            all.push(nodes[i] + nodes[j]);
        }
    }
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&p) if t <= p * (1.0 + 1e-13) + f64::MIN_POSITIVE => {}
            _ => out.push(t),
        }
    }
    out
}
