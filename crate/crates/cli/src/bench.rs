use std::io;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use lkv_core::experiments::{run_experiment, BenchConfig, BenchRow, Experiment, GridOperator, StartVector};

use crate::run::write_csv;
use crate::{BenchArgs, OperatorArg, Outcome, StartArg};

pub const THREADS_VAR: &str = "LKV_THREADS";

#[derive(Debug, Serialize)]
struct CsvRow {
    experiment: String,
    method: String,
    size: usize,
    dim: usize,
    matvecs: usize,
    final_error: f64,
    wall_ms: f64,
    first_phase_fraction: Option<f64>,
    converged: bool,
}

impl From<&BenchRow> for CsvRow {
    fn from(r: &BenchRow) -> Self {
        Self {
            experiment: r.experiment.to_string(),
            method: r.method.to_string(),
            size: r.size,
            dim: r.dim,
            matvecs: r.matvecs,
            final_error: r.final_error,
            wall_ms: r.wall_ms,
            first_phase_fraction: r.first_phase_fraction,
            converged: r.converged,
        }
    }
}

fn threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR}={v:?}"))?;
            Ok(Some(n.max(1)))
        }
        Err(_) => Ok(None),
    }
}

pub fn bench(args: &BenchArgs) -> Result<Outcome> {
    let experiment: Experiment = args.experiment.parse()?;
    let operator = match args.operator {
        OperatorArg::Laplacian => GridOperator::Laplacian,
        OperatorArg::Cd => GridOperator::ConvectionDiffusion(args.eps),
    };
    let start = match args.start {
        StartArg::Ones => StartVector::Ones,
        StartArg::Random => StartVector::Random,
    };
    let mut cfg = BenchConfig::new(args.m)
        .with_operator(operator)
        .with_start(start)
        .with_seed(args.seed);
    cfg.tol = args.tol;
    cfg.max_cycles = args.max_cycles;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let results: Vec<Vec<BenchRow>> = pool.install(|| {
        args.sizes
            .par_iter()
            .map(|&size| {
                run_experiment(experiment, size, &cfg).with_context(|| format!("{experiment} at size {size}"))
            })
            .collect::<Result<_>>()
    })?;

    let rows: Vec<BenchRow> = results.into_iter().flatten().collect();
    let csv_rows: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    match &args.output {
        Some(path) => write_csv(
            &csv_rows,
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )?,
        None => write_csv(&csv_rows, io::stdout().lock())?,
    }
    if rows.iter().all(|r| r.converged) {
        Ok(Outcome::Converged)
    } else {
        Ok(Outcome::MaxCycles)
    }
}
