use std::io::{self, Write};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use lkv_core::baselines::{stieltjes_pipeline, two_pass_lanczos, TwoPassConfig};
use lkv_core::experiments::{ones_unit, random_unit, FIRST_PHASE_RTOL};
use lkv_core::operators::read_matrix_market;
use lkv_core::reference::reference_solution;
use lkv_core::restart::{apply, RestartConfig, RestartReport, StoppingMode, Termination};
use lkv_core::{relative_error, Counted, SparseMatrix};

use crate::vector_io::{read_vector, write_vector};
use crate::{MethodArg, Outcome, RunArgs, StoppingArg};

#[derive(Debug, Serialize)]
pub struct CycleRow {
    pub cycle: usize,
    pub matvecs: usize,
    pub update_norm: f64,
    pub iterate_norm: f64,
    pub rel_error: Option<f64>,
    pub wall_ms: f64,
}

pub fn load_matrix(spec: &str) -> Result<SparseMatrix> {
    if let Some(list) = spec.strip_prefix("diag:") {
        let d: Vec<f64> = list
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad diagonal entry {s:?}")))
            .collect::<Result<_>>()?;
        if d.is_empty() {
            bail!("empty diagonal");
        }
        return Ok(SparseMatrix::diagonal(&d));
    }
    read_matrix_market(spec).with_context(|| format!("reading matrix {spec}"))
}

fn rows_from(report: &RestartReport) -> Vec<CycleRow> {
    report
        .records
        .iter()
        .map(|r| CycleRow {
            cycle: r.cycle,
            matvecs: r.matvecs,
            update_norm: r.update_norm,
            iterate_norm: r.iterate_norm,
            rel_error: r.rel_error,
            wall_ms: r.wall_ms,
        })
        .collect()
}

fn outcome(report: &RestartReport) -> Outcome {
    if report.termination == Termination::MaxCycles {
        Outcome::MaxCycles
    } else {
        Outcome::Converged
    }
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let a = load_matrix(&args.matrix)?;
    let n = a.dim();
    let b = match (&args.b_file, args.seed) {
        (Some(path), _) => read_vector(path)?,
        (None, Some(seed)) => random_unit(n, seed),
        (None, None) => ones_unit(n),
    };
    if b.len() != n {
        bail!("starting vector has length {}, matrix dimension is {n}", b.len());
    }
    let reference = match args.reference.as_deref() {
        None => None,
        Some("auto") => Some(reference_solution(&a, &b, &args.function.native()).context("computing reference")?),
        Some(path) => Some(read_vector(path.as_ref())?),
    };
    if let Some(r) = &reference {
        if r.len() != n {
            bail!("reference has length {}, matrix dimension is {n}", r.len());
        }
    }
    let stopping = match args.stopping {
        Some(StoppingArg::Reference) => StoppingMode::Reference,
        Some(StoppingArg::Update) => StoppingMode::UpdateNorm,
        None if reference.is_some() => StoppingMode::Reference,
        None => StoppingMode::UpdateNorm,
    };
    let cfg = RestartConfig::new(args.m, args.tol)
        .with_stopping(stopping)
        .with_max_cycles(args.max_cycles);
    let reference = reference.as_deref();

    let start = Instant::now();
    let op = Counted::new(&a);
    let (x, rows, result) = match args.method {
        MethodArg::Auto | MethodArg::Laplace => {
            let f = if args.method == MethodArg::Auto {
                args.function.native()
            } else {
                args.function.laplace()
            };
            let (x, report) = apply(&op, &b, &f, &cfg, reference)?;
            (x, rows_from(&report), outcome(&report))
        }
        MethodArg::Stieltjes => match args.function.pipeline()? {
            Some(kind) => {
                let out = stieltjes_pipeline(&op, &b, kind, &cfg, FIRST_PHASE_RTOL, reference)?;
                eprintln!(
                    "first phase: {} of {} matvecs ({:.3})",
                    out.first_phase_matvecs,
                    out.matvecs,
                    out.first_phase_fraction()
                );
                let (rows, o) = (rows_from(&out.report), outcome(&out.report));
                (out.x, rows, o)
            }
            None => {
                let (x, report) = apply(&op, &b, &args.function.native(), &cfg, reference)?;
                (x, rows_from(&report), outcome(&report))
            }
        },
        MethodArg::TwoPass => {
            let tp = TwoPassConfig::new(args.tol, args.m).with_stopping(stopping);
            let (x, rep) = two_pass_lanczos(&op, &b, args.function.scalar(), &tp, reference)?;
            let iterate_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let row = CycleRow {
                cycle: rep.iterations.div_ceil(args.m),
                matvecs: rep.matvecs,
                update_norm: rep.surrogate,
                iterate_norm,
                rel_error: rep.rel_error,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            let o = if rep.converged { Outcome::Converged } else { Outcome::MaxCycles };
            (x, vec![row], o)
        }
    };

    match &args.csv {
        Some(path) => write_csv(
            &rows,
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.output {
        write_vector(&x, path)?;
    }
    let err = reference.map(|r| relative_error(&x, r));
    eprintln!(
        "{} cycles, {} matvecs, {:.1} ms{}{}",
        rows.len(),
        op.matvecs(),
        start.elapsed().as_secs_f64() * 1e3,
        err.map(|e| format!(", relative error {e:.3e}")).unwrap_or_default(),
        if result == Outcome::MaxCycles { ", max_cycles reached" } else { "" },
    );
    Ok(result)
}
