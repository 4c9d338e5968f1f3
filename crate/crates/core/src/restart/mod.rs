//! Restarted Arnoldi approximation of `F(A) b`.
//!
//! Laplace transforms run the recursive error-function chain with spline
//! interpolation between cycles. Two-sided transforms run two chains on a
//! shared Krylov basis, complete Bernstein functions reduce to a sign-flipped
//! Laplace chain, and Stieltjes functions use the resolvent comparator.

mod chain;
pub mod kernels;
mod stieltjes;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::{arnoldi, KrylovDecomposition};
use crate::operators::LinearOperator;
use crate::quadrature::{build_half_line_rule, build_laplace_rule, Tolerance};
use crate::smallmat::{eig_hermitian, expm_action, real_part_range, unit, SpectralCache};
use crate::vecops::{axpy, norm2, relative_error};

use chain::{ChainParams, ChainStats, ErrorChain};
pub use kernels::{
    builtin_kernels, exp_sqrt, exp_sqrt_stieltjes, gamma, inv_sqrt_laplace, inv_sqrt_stieltjes,
    power_neg_three_halves, sqrt, ClosedForm, Kernel, TransformFunction, TransformKind,
    POWER_NEG_THREE_HALVES_CONST,
};

const DEFAULT_MAX_CYCLES: usize = 100;
/// Relative slack (in units of `||H||`) for anchors on a closed boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingMode {
    /// `||d^(k)|| <= tol ||f^(k)||`
    #[default]
    UpdateNorm,
    /// Relative error against a supplied reference vector.
    Reference,
}

/// Whether the quadrature rule is rebuilt for every error function or the
/// first-cycle rule is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RulePolicy {
    #[default]
    Rebuild,
    Freeze,
}

#[derive(Debug, Clone)]
pub struct RestartConfig {
    /// Cycle length.
    pub m: usize,
    pub tol: f64,
    pub eps_q: f64,
    pub eps_s: f64,
    pub max_cycles: usize,
    pub stopping: StoppingMode,
    pub rule_policy: RulePolicy,
}

impl RestartConfig {
    /// Defaults: `eps_q = 1e-3 tol`, `eps_s = eps_q`, 100 cycles.
    pub fn new(m: usize, tol: f64) -> Self {
        let eps_q = 1e-3 * tol;
        Self {
            m,
            tol,
            eps_q,
            eps_s: eps_q,
            max_cycles: DEFAULT_MAX_CYCLES,
            stopping: StoppingMode::UpdateNorm,
            rule_policy: RulePolicy::Rebuild,
        }
    }

    pub fn with_stopping(mut self, stopping: StoppingMode) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_max_cycles(mut self, max_cycles: usize) -> Self {
        self.max_cycles = max_cycles;
        self
    }

    pub fn with_rule_policy(mut self, policy: RulePolicy) -> Self {
        self.rule_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("cycle length m must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.eps_q > 0.0 && self.eps_q <= self.tol) {
            return Err(Error::InvalidArgument(format!(
                "eps_q must lie in (0, tol], got {}",
                self.eps_q
            )));
        }
        if !(self.eps_s > 0.0 && self.eps_s.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps_s must be positive, got {}", self.eps_s)));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidArgument("max_cycles must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Cumulative matrix-vector products after this cycle.
    pub matvecs: usize,
    pub update_norm: f64,
    pub iterate_norm: f64,
    pub rel_error: Option<f64>,
    pub wall_ms: f64,
    /// Signed scale `beta_k` of the cycle.
    pub beta: f64,
    /// `h^(k)_{m+1,m}`
    pub h_next: f64,
    pub rule_len: usize,
    pub spline_knots: usize,
    pub refinement_rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    /// Invariant subspace found; the last iterate is exact up to quadrature.
    Breakdown,
    MaxCycles,
}

#[derive(Debug, Clone)]
pub struct RestartReport {
    pub records: Vec<CycleRecord>,
    pub termination: Termination,
    /// Spectral anchor from the first Hessenberg matrix.
    pub nu: f64,
    pub matvecs: usize,
}

impl RestartReport {
    pub fn cycles(&self) -> usize {
        self.records.len()
    }

    pub fn final_rel_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.rel_error)
    }

    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxCycles
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CycleInfo {
    beta: f64,
    rule_len: usize,
    spline_knots: usize,
    refinements: usize,
}

impl CycleInfo {
    fn from_stats(beta: f64, s: ChainStats) -> Self {
        Self {
            beta,
            rule_len: s.rule_len,
            spline_knots: s.spline_knots,
            refinements: s.refinements,
        }
    }
}

/// One restart method: produces the small update vector `y` of each cycle,
/// with the update `d = V y`.
trait Engine {
    fn first(&mut self, dec: &KrylovDecomposition) -> Result<(DVector<f64>, CycleInfo)>;
    fn next(&mut self, dec: &KrylovDecomposition, iterate_norm: f64) -> Result<(DVector<f64>, CycleInfo)>;
    fn nu(&self) -> f64;
}

fn spectral_cache(dec: &KrylovDecomposition) -> Result<Option<SpectralCache>> {
    if dec.is_hermitian() {
        eig_hermitian(dec.hessenberg()).map(Some)
    } else {
        Ok(None)
    }
}

fn real_range(h: &DMatrix<f64>, cache: Option<&SpectralCache>) -> Result<(f64, f64)> {
    match cache {
        Some(c) => {
            let e = c.eigenvalues();
            Ok((e[0], e[e.len() - 1]))
        }
        None => real_part_range(h, false),
    }
}

/// Checks the anchor against the abscissa of absolute convergence. On a
/// closed boundary, anchors within rounding of the abscissa are moved onto it.
fn anchor(nu: f64, abscissa: f64, closed: bool, h: &DMatrix<f64>) -> Result<f64> {
    if nu > abscissa {
        return Ok(nu);
    }
    if closed && nu >= abscissa - BOUNDARY_SLACK * h.norm() {
        return Ok(abscissa);
    }
    Err(Error::OutsideConvergenceRegion {
        nu,
        abscissa,
        closed,
    })
}

fn run<O, E>(
    op: &O,
    b: &[f64],
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
    engine: &mut E,
    x0: Option<Vec<f64>>,
    extra_matvecs: usize,
) -> Result<(Vec<f64>, RestartReport)>
where
    O: LinearOperator + ?Sized,
    E: Engine,
{
    cfg.validate()?;
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if let Some(r) = reference {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: r.len(),
            });
        }
    }
    if cfg.stopping == StoppingMode::Reference && reference.is_none() {
        return Err(Error::InvalidArgument("reference stopping needs a reference vector".into()));
    }
    let m = cfg.m.min(n);
    let mut x = x0.unwrap_or_else(|| vec![0.0; n]);
    let mut matvecs = extra_matvecs;
    let mut records = Vec::new();
    let mut termination = Termination::MaxCycles;
    let mut start = b.to_vec();

    for cycle in 1..=cfg.max_cycles {
        let clock = Instant::now();
        let dec = arnoldi(op, &start, m)?;
        matvecs += dec.m();
        let (y, info) = if cycle == 1 {
            engine.first(&dec)?
        } else {
            engine.next(&dec, norm2(&x))?
        };
        let d = dec.combine(y.as_slice())?;
        axpy(1.0, &d, &mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("restart iterate"));
        }
        let update_norm = norm2(&d);
        let iterate_norm = norm2(&x);
        let rel_error = reference.map(|r| relative_error(&x, r));
        records.push(CycleRecord {
            cycle,
            matvecs,
            update_norm,
            iterate_norm,
            rel_error,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            beta: info.beta,
            h_next: dec.h_next(),
            rule_len: info.rule_len,
            spline_knots: info.spline_knots,
            refinement_rounds: info.refinements,
        });
        let done = match cfg.stopping {
            StoppingMode::UpdateNorm => update_norm <= cfg.tol * iterate_norm,
            StoppingMode::Reference => rel_error.is_some_and(|e| e <= cfg.tol),
        };
        if done {
            termination = Termination::Converged;
            break;
        }
        if dec.breakdown() {
            termination = Termination::Breakdown;
            break;
        }
        start = dec.into_next();
    }
    let report = RestartReport {
        records,
        termination,
        nu: engine.nu(),
        matvecs,
    };
    Ok((x, report))
}

struct LaplaceEngine {
    kernel: Kernel,
    abscissa: f64,
    closed: bool,
    cfg: RestartConfig,
    norm_b: f64,
    /// Run on `-H` with `-h` (the backward half of a two-sided transform).
    negate: bool,
    chain: Option<ErrorChain>,
    nu: f64,
}

impl LaplaceEngine {
    fn new(kernel: Kernel, abscissa: f64, closed: bool, cfg: &RestartConfig, norm_b: f64, negate: bool) -> Self {
        Self {
            kernel,
            abscissa,
            closed,
            cfg: cfg.clone(),
            norm_b,
            negate,
            chain: None,
            nu: f64::NAN,
        }
    }

    fn small(&self, dec: &KrylovDecomposition) -> Result<(DMatrix<f64>, Option<SpectralCache>, f64)> {
        let (h, h_next) = if self.negate {
            (-dec.hessenberg(), -dec.h_next())
        } else {
            (dec.hessenberg().clone(), dec.h_next())
        };
        let cache = if dec.is_hermitian() {
            Some(eig_hermitian(&h)?)
        } else {
            None
        };
        Ok((h, cache, h_next))
    }

    fn params(&self, beta: f64) -> ChainParams {
        ChainParams {
            nu: self.nu,
            beta,
            eps_q: self.cfg.eps_q,
            eps_s: self.cfg.eps_s,
            policy: self.cfg.rule_policy,
        }
    }
}

impl Engine for LaplaceEngine {
    fn first(&mut self, dec: &KrylovDecomposition) -> Result<(DVector<f64>, CycleInfo)> {
        let (h, cache, h_next) = self.small(dec)?;
        let (lo, _) = real_range(&h, cache.as_ref())?;
        self.nu = anchor(lo, self.abscissa, self.closed, &h)?;
        let k = self.kernel.clone();
        let rule = build_laplace_rule(move |t| k(t), self.nu, self.cfg.eps_q)?;
        let rule_len = rule.len();
        let (chain, y) = ErrorChain::start(
            self.kernel.clone(),
            rule,
            &h,
            cache.as_ref(),
            h_next,
            self.params(self.norm_b),
        )?;
        self.chain = Some(chain);
        let info = CycleInfo {
            beta: self.norm_b,
            rule_len,
            ..Default::default()
        };
        Ok((y * self.norm_b, info))
    }

    fn next(&mut self, dec: &KrylovDecomposition, iterate_norm: f64) -> Result<(DVector<f64>, CycleInfo)> {
        let (h, cache, h_next) = self.small(dec)?;
        let chain = self.chain.as_mut().expect("first cycle ran");
        let (y, stats) = chain.advance(&h, cache.as_ref(), h_next, iterate_norm)?;
        Ok((y, CycleInfo::from_stats(chain.beta(), stats)))
    }

    fn nu(&self) -> f64 {
        self.nu
    }
}

struct TwoSidedEngine {
    forward: LaplaceEngine,
    backward: LaplaceEngine,
}

impl Engine for TwoSidedEngine {
    fn first(&mut self, dec: &KrylovDecomposition) -> Result<(DVector<f64>, CycleInfo)> {
        let (y1, info) = self.forward.first(dec)?;
        let (y2, info2) = self.backward.first(dec)?;
        Ok((
            y1 + y2,
            CycleInfo {
                rule_len: info.rule_len + info2.rule_len,
                ..info
            },
        ))
    }

    fn next(&mut self, dec: &KrylovDecomposition, iterate_norm: f64) -> Result<(DVector<f64>, CycleInfo)> {
        let (y1, info) = self.forward.next(dec, iterate_norm)?;
        let (y2, info2) = self.backward.next(dec, iterate_norm)?;
        Ok((
            y1 + y2,
            CycleInfo {
                rule_len: info.rule_len + info2.rule_len,
                spline_knots: info.spline_knots + info2.spline_knots,
                refinements: info.refinements.max(info2.refinements),
                beta: info.beta,
            },
        ))
    }

    fn nu(&self) -> f64 {
        self.forward.nu
    }
}

struct BernsteinEngine {
    inner: LaplaceEngine,
}

impl Engine for BernsteinEngine {
    fn first(&mut self, dec: &KrylovDecomposition) -> Result<(DVector<f64>, CycleInfo)> {
        let e = &mut self.inner;
        let (h, cache, h_next) = e.small(dec)?;
        let (lo, _) = real_range(&h, cache.as_ref())?;
        if !(lo > e.abscissa) {
            return Err(Error::OutsideConvergenceRegion {
                nu: lo,
                abscissa: e.abscissa,
                closed: false,
            });
        }
        e.nu = lo;
        let f = e.kernel.clone();
        let nu = e.nu;
        let tol = Tolerance::new(e.cfg.eps_q, e.cfg.eps_q);
        let rule = build_half_line_rule(move |t| f(t) * -(-nu * t).exp_m1(), tol, nu)?;
        let m = h.nrows();
        let mut y = DVector::zeros(m);
        let mut g = Vec::with_capacity(rule.len());
        let e1 = unit(m, 0);
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let ft = (e.kernel)(t);
            // (I - exp(-tH)) e_1 without cancellation for small t
            let (one_minus, gi) = match &cache {
                Some(c) => {
                    let first = c.vectors().row(0).transpose();
                    let s = first.zip_map(c.eigenvalues(), |q, l| -q * (-t * l).exp_m1());
                    (c.vectors() * s, c.exp_entry(t))
                }
                None => {
                    let ex = expm_action(&h, &e1, t, None)?;
                    let gi = ex[m - 1];
                    (&e1 - ex, gi)
                }
            };
            if ft != 0.0 {
                y.axpy(w * ft, &one_minus, 1.0);
            }
            g.push(gi);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Bernstein quadrature sum"));
        }
        let rule_len = rule.len();
        // the error is that of the Laplace transform of -f
        let chain = ErrorChain::start_with_g(e.kernel.clone(), rule, g, h_next, e.params(-e.norm_b))?;
        e.chain = Some(chain);
        let info = CycleInfo {
            beta: -e.norm_b,
            rule_len,
            ..Default::default()
        };
        Ok((y * e.norm_b, info))
    }

    fn next(&mut self, dec: &KrylovDecomposition, iterate_norm: f64) -> Result<(DVector<f64>, CycleInfo)> {
        self.inner.next(dec, iterate_norm)
    }

    fn nu(&self) -> f64 {
        self.inner.nu
    }
}

fn norm_of(b: &[f64]) -> Result<f64> {
    let nb = norm2(b);
    if nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !nb.is_finite() {
        return Err(Error::NonFinite("right-hand side"));
    }
    Ok(nb)
}

fn wrong_kind(expected: &str, f: &TransformFunction) -> Error {
    Error::InvalidArgument(format!("{} is not a {expected} transform", f.name))
}

/// Restarted Arnoldi for a Laplace transform `F = L{f}`.
pub fn restarted_laplace<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, RestartReport)> {
    let TransformKind::Laplace {
        kernel,
        abscissa,
        closed,
    } = &f.kind
    else {
        return Err(wrong_kind("Laplace", f));
    };
    cfg.validate()?;
    let nb = norm_of(b)?;
    let mut engine = LaplaceEngine::new(kernel.clone(), *abscissa, *closed, cfg, nb, false);
    run(op, b, cfg, reference, &mut engine, None, 0)
}

/// Two-sided Laplace transforms: one Krylov basis per cycle, one error chain
/// on `(H, h)` for `f(t)` and one on `(-H, -h)` for `f(-t)`.
pub fn two_sided_apply<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, RestartReport)> {
    let TransformKind::TwoSided {
        forward,
        backward,
        forward_abscissa,
        backward_abscissa,
    } = &f.kind
    else {
        return Err(wrong_kind("two-sided Laplace", f));
    };
    cfg.validate()?;
    let nb = norm_of(b)?;
    let mut engine = TwoSidedEngine {
        forward: LaplaceEngine::new(forward.clone(), *forward_abscissa, false, cfg, nb, false),
        backward: LaplaceEngine::new(backward.clone(), *backward_abscissa, false, cfg, nb, true),
    };
    run(op, b, cfg, reference, &mut engine, None, 0)
}

/// Complete Bernstein functions `F(s) = c + a s + int (1 - e^{-st}) f(t) dt`.
pub fn bernstein_apply<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, RestartReport)> {
    let TransformKind::Bernstein {
        c,
        a,
        density,
        abscissa,
    } = &f.kind
    else {
        return Err(wrong_kind("Bernstein", f));
    };
    if !(*c >= 0.0 && *a >= 0.0) {
        return Err(Error::InvalidArgument("Bernstein constants must be nonnegative".into()));
    }
    cfg.validate()?;
    let nb = norm_of(b)?;
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let mut x0: Vec<f64> = b.iter().map(|v| c * v).collect();
    let mut extra = 0;
    if *a != 0.0 {
        let mut ab = vec![0.0; n];
        op.apply(b, &mut ab);
        axpy(*a, &ab, &mut x0);
        extra = 1;
    }
    let mut engine = BernsteinEngine {
        inner: LaplaceEngine::new(density.clone(), *abscissa, false, cfg, nb, false),
    };
    run(op, b, cfg, reference, &mut engine, Some(x0), extra)
}

/// Restarted Arnoldi for a Stieltjes function, integrating the resolvent
/// error representation directly.
pub fn stieltjes_restart<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, RestartReport)> {
    let TransformKind::Stieltjes { density } = &f.kind else {
        return Err(wrong_kind("Stieltjes", f));
    };
    cfg.validate()?;
    let nb = norm_of(b)?;
    let mut engine = stieltjes::StieltjesEngine::new(density.clone(), cfg.eps_q, nb);
    run(op, b, cfg, reference, &mut engine, None, 0)
}

/// The error function `f^(k)` of a Laplace transform after running the chain
/// over Hermitian Hessenberg matrices `H^(1..k)` with subdiagonal entries
/// `h^(1..k)_{m+1,m}`. The error after cycle `k - 1` is
/// `-h^(k-1) ||b|| L{f^(k)}(A) v^(k-1)_{m+1}` (up to the sign convention of
/// the scale `beta`).
pub struct ErrorFunction {
    chain: ErrorChain,
}

impl ErrorFunction {
    pub fn eval(&self, t: f64) -> f64 {
        self.chain.error_function(t)
    }
}

pub fn error_function(
    f: &TransformFunction,
    cycles: &[(DMatrix<f64>, f64)],
    eps_q: f64,
) -> Result<ErrorFunction> {
    let TransformKind::Laplace { kernel, .. } = &f.kind else {
        return Err(wrong_kind("Laplace", f));
    };
    let ((h1, hn1), rest) = cycles
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("at least one cycle is needed".into()))?;
    let c1 = eig_hermitian(h1)?;
    let nu = c1.eigenvalues()[0];
    let k = kernel.clone();
    let rule = build_laplace_rule(move |t| k(t), nu, eps_q)?;
    let params = ChainParams {
        nu,
        beta: 1.0,
        eps_q,
        eps_s: eps_q,
        policy: RulePolicy::Rebuild,
    };
    let (mut chain, _) = ErrorChain::start(kernel.clone(), rule, h1, Some(&c1), *hn1, params)?;
    for (h, hn) in rest {
        let c = eig_hermitian(h)?;
        chain.advance(h, Some(&c), *hn, 1.0)?;
    }
    Ok(ErrorFunction { chain })
}

/// Dispatches on the kind of `f`.
pub fn apply<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    f: &TransformFunction,
    cfg: &RestartConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, RestartReport)> {
    match f.kind {
        TransformKind::Laplace { .. } => restarted_laplace(op, b, f, cfg, reference),
        TransformKind::TwoSided { .. } => two_sided_apply(op, b, f, cfg, reference),
        TransformKind::Bernstein { .. } => bernstein_apply(op, b, f, cfg, reference),
        TransformKind::Stieltjes { .. } => stieltjes_restart(op, b, f, cfg, reference),
    }
}
