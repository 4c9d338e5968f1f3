//! Benchmark drivers: one function per experiment, each producing one row
//! per method for a given grid size.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{stieltjes_pipeline, two_pass_lanczos, PipelineKind, TwoPassConfig};
use crate::error::{Error, Result};
use crate::operators::{
    convection_diffusion_nd, graph_laplacian, laplacian_nd, largest_connected_component,
    random_graph, Counted, SparseMatrix,
};
use crate::reference::reference_solution;
use crate::restart::{
    apply, exp_sqrt, gamma, power_neg_three_halves, sqrt, RestartConfig, RestartReport,
    StoppingMode, TransformFunction,
};
use crate::vecops::relative_error;

/// Residual target of the linear solve in the Stieltjes pipeline.
pub const FIRST_PHASE_RTOL: f64 = 1e-9;
/// Edges per node of the synthetic fractional-diffusion graph.
pub const FRACDIFF_EDGES_PER_NODE: usize = 4;
pub const FRACDIFF_TAU: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// `A^{-3/2} b` on a 3D grid operator.
    S32,
    /// `Gamma(A) b` on a 2D grid operator.
    Gamma,
    /// `sqrt(A) b` on a 3D grid operator.
    Sqrt,
    /// `exp(-tau sqrt(L)) b` on a random graph Laplacian with `size` nodes.
    Fracdiff,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Self::S32, Self::Gamma, Self::Sqrt, Self::Fracdiff];

    pub fn name(self) -> &'static str {
        match self {
            Self::S32 => "s32",
            Self::Gamma => "gamma",
            Self::Sqrt => "sqrt",
            Self::Fracdiff => "fracdiff",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridOperator {
    Laplacian,
    /// Convection-diffusion with this diffusion coefficient.
    ConvectionDiffusion(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Laplace,
    Stieltjes,
    TwoPass,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Laplace => "laplace",
            Self::Stieltjes => "stieltjes",
            Self::TwoPass => "two-pass",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub m: usize,
    pub tol: f64,
    pub operator: GridOperator,
    /// Seed for randomized starting vectors and graphs.
    pub seed: u64,
    pub max_cycles: usize,
    pub start: StartVector,
    pub stopping: StoppingMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartVector {
    /// Normalized all-ones.
    #[default]
    Ones,
    /// Seeded random unit vector.
    Random,
}

impl BenchConfig {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            tol: 1e-7,
            operator: GridOperator::Laplacian,
            seed: 0,
            max_cycles: 100,
            start: StartVector::Ones,
            stopping: StoppingMode::Reference,
        }
    }

    pub fn with_start(mut self, start: StartVector) -> Self {
        self.start = start;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingMode) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_operator(mut self, operator: GridOperator) -> Self {
        self.operator = operator;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn restart(&self) -> RestartConfig {
        RestartConfig::new(self.m, self.tol)
            .with_stopping(self.stopping)
            .with_max_cycles(self.max_cycles)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub experiment: Experiment,
    pub method: Method,
    /// Grid size per dimension, or node count for graphs.
    pub size: usize,
    /// Matrix dimension.
    pub dim: usize,
    pub matvecs: usize,
    pub final_error: f64,
    pub wall_ms: f64,
    /// Share of matvecs spent before the restarted phase (Stieltjes pipeline).
    pub first_phase_fraction: Option<f64>,
    pub converged: bool,
    /// Relative error after each cycle (or each check, for two-pass).
    pub error_history: Vec<f64>,
}

/// Normalized all-ones vector.
pub fn ones_unit(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

fn start_vector(n: usize, cfg: &BenchConfig) -> Vec<f64> {
    match cfg.start {
        StartVector::Ones => ones_unit(n),
        StartVector::Random => random_unit(n, cfg.seed),
    }
}

/// Random unit vector with entries uniform in `[-1, 1)`.
pub fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalized(v)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

pub fn grid_matrix(op: GridOperator, n: usize, d: usize) -> Result<SparseMatrix> {
    match op {
        GridOperator::Laplacian => laplacian_nd(n, d),
        GridOperator::ConvectionDiffusion(eps) => convection_diffusion_nd(n, eps, d),
    }
}

/// Laplacian of the largest component of a random graph with `nodes` nodes.
pub fn fracdiff_matrix(nodes: usize, seed: u64) -> Result<SparseMatrix> {
    let g = random_graph(nodes, FRACDIFF_EDGES_PER_NODE * nodes / 2, seed)?;
    Ok(graph_laplacian(&largest_connected_component(&g)?))
}

pub fn run_experiment(exp: Experiment, size: usize, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let ctx = |method, dim| Row {
        experiment: exp,
        method,
        size,
        dim,
    };
    match exp {
        Experiment::S32 => {
            let a = grid_matrix(cfg.operator, size, 3)?;
            let b = start_vector(a.dim(), cfg);
            let f = power_neg_three_halves();
            let x_ref = reference_solution(&a, &b, &f)?;
            let mut rows = vec![laplace_row(ctx(Method::Laplace, a.dim()), &a, &b, &f, cfg, &x_ref)?];
            rows.push(pipeline_row(ctx(Method::Stieltjes, a.dim()), &a, &b, PipelineKind::InverseFirst, cfg, &x_ref)?);
            if a.is_symmetric() {
                rows.push(two_pass_row(ctx(Method::TwoPass, a.dim()), &a, &b, &f, cfg, &x_ref)?);
            }
            Ok(rows)
        }
        Experiment::Gamma => {
            let a = grid_matrix(cfg.operator, size, 2)?;
            let b = start_vector(a.dim(), cfg);
            let f = gamma();
            let x_ref = reference_solution(&a, &b, &f)?;
            let mut rows = vec![laplace_row(ctx(Method::Laplace, a.dim()), &a, &b, &f, cfg, &x_ref)?];
            if a.is_symmetric() {
                rows.push(two_pass_row(ctx(Method::TwoPass, a.dim()), &a, &b, &f, cfg, &x_ref)?);
            }
            Ok(rows)
        }
        Experiment::Sqrt => {
            let a = grid_matrix(cfg.operator, size, 3)?;
            let b = start_vector(a.dim(), cfg);
            let f = sqrt();
            let x_ref = reference_solution(&a, &b, &f)?;
            let mut rows = vec![laplace_row(ctx(Method::Laplace, a.dim()), &a, &b, &f, cfg, &x_ref)?];
            rows.push(pipeline_row(ctx(Method::Stieltjes, a.dim()), &a, &b, PipelineKind::ProductFirst, cfg, &x_ref)?);
            if a.is_symmetric() {
                rows.push(two_pass_row(ctx(Method::TwoPass, a.dim()), &a, &b, &f, cfg, &x_ref)?);
            }
            Ok(rows)
        }
        Experiment::Fracdiff => {
            let a = fracdiff_matrix(size, cfg.seed)?;
            let b = zero_mean_unit(a.dim(), cfg.seed);
            let f = exp_sqrt(FRACDIFF_TAU);
            let x_ref = reference_solution(&a, &b, &f)?;
            Ok(vec![
                laplace_row(ctx(Method::Laplace, a.dim()), &a, &b, &f, cfg, &x_ref)?,
                pipeline_row(
                    ctx(Method::Stieltjes, a.dim()),
                    &a,
                    &b,
                    PipelineKind::ExpSqrt { tau: FRACDIFF_TAU },
                    cfg,
                    &x_ref,
                )?,
                two_pass_row(ctx(Method::TwoPass, a.dim()), &a, &b, &f, cfg, &x_ref)?,
            ])
        }
    }
}

/// Random unit vector orthogonal to the constant vector.
pub fn zero_mean_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut v = random_unit(n, seed);
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    normalized(v)
}

struct Row {
    experiment: Experiment,
    method: Method,
    size: usize,
    dim: usize,
}

impl Row {
    fn finish(
        self,
        matvecs: usize,
        final_error: f64,
        start: Instant,
        first_phase_fraction: Option<f64>,
        converged: bool,
        error_history: Vec<f64>,
    ) -> BenchRow {
        BenchRow {
            experiment: self.experiment,
            method: self.method,
            size: self.size,
            dim: self.dim,
            matvecs,
            final_error,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            first_phase_fraction,
            converged,
            error_history,
        }
    }
}

fn history(report: &RestartReport) -> Vec<f64> {
    report.records.iter().filter_map(|r| r.rel_error).collect()
}

fn laplace_row(
    row: Row,
    a: &SparseMatrix,
    b: &[f64],
    f: &TransformFunction,
    cfg: &BenchConfig,
    x_ref: &[f64],
) -> Result<BenchRow> {
    let start = Instant::now();
    let op = Counted::new(a);
    let (x, report) = apply(&op, b, f, &cfg.restart(), Some(x_ref))?;
    let err = relative_error(&x, x_ref);
    Ok(row.finish(op.matvecs(), err, start, None, report.converged(), history(&report)))
}

fn two_pass_row(
    row: Row,
    a: &SparseMatrix,
    b: &[f64],
    f: &TransformFunction,
    cfg: &BenchConfig,
    x_ref: &[f64],
) -> Result<BenchRow> {
    let cf = f
        .closed_form
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no closed form", f.name)))?
        .0
        .clone();
    let start = Instant::now();
    let op = Counted::new(a);
    let tp = TwoPassConfig::new(cfg.tol, cfg.m).with_stopping(cfg.stopping);
    let (x, report) = two_pass_lanczos(&op, b, |s| cf(s), &tp, Some(x_ref))?;
    let err = relative_error(&x, x_ref);
    Ok(row.finish(op.matvecs(), err, start, None, report.converged, vec![err]))
}

fn pipeline_row(
    row: Row,
    a: &SparseMatrix,
    b: &[f64],
    kind: PipelineKind,
    cfg: &BenchConfig,
    x_ref: &[f64],
) -> Result<BenchRow> {
    let start = Instant::now();
    let out = stieltjes_pipeline(a, b, kind, &cfg.restart(), FIRST_PHASE_RTOL, Some(x_ref))?;
    let err = relative_error(&out.x, x_ref);
    let frac = out.first_phase_fraction();
    Ok(row.finish(out.matvecs, err, start, Some(frac), out.report.converged(), history(&out.report)))
}
