//! `lkv`: matrix generation, function application and benchmark sweeps.

mod bench;
mod functions;
mod gen;
mod run;
mod vector_io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use functions::FunctionSpec;

#[derive(Parser, Debug)]
#[command(name = "lkv", version, about = "Restarted Krylov approximation of F(A) b")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a benchmark matrix in Matrix Market format.
    Gen(GenArgs),
    /// Approximate F(A) b for one matrix.
    Run(RunArgs),
    /// Sweep an experiment over grid sizes and print one CSV row per method and size.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Laplacian1d,
    Laplacian2d,
    Laplacian3d,
    Cd1d,
    Cd2d,
    Cd3d,
    /// Laplacian of the graph read from --input.
    Graph,
    /// Laplacian of a seeded random graph with --n nodes.
    RandomGraph,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: MatrixKind,
    /// Grid points per dimension, or nodes for random-graph.
    #[arg(long)]
    n: Option<usize>,
    /// Diffusion coefficient of the convection-diffusion operators.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Adjacency matrix (Matrix Market) for --kind graph.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Keep only the largest connected component.
    #[arg(long)]
    lcc: bool,
    /// Edges of the random graph (default 2 n).
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Laplace,
    Stieltjes,
    TwoPass,
    Auto,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoppingArg {
    Update,
    Reference,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Matrix Market file, or `diag:d1,d2,...`.
    #[arg(long)]
    matrix: String,
    /// power-neg-3-2, exp-sqrt:<tau>, gamma, sqrt or inv-sqrt-stieltjes.
    #[arg(long)]
    function: FunctionSpec,
    #[arg(long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Reference vector file, or `auto` to compute one.
    #[arg(long)]
    reference: Option<String>,
    /// Defaults to `reference` when --reference is given, else `update`.
    #[arg(long, value_enum)]
    stopping: Option<StoppingArg>,
    #[arg(long, default_value_t = 100)]
    max_cycles: usize,
    /// Starting vector file; normalized all-ones if omitted.
    #[arg(long, conflicts_with = "seed")]
    b_file: Option<PathBuf>,
    /// Use a seeded random unit starting vector.
    #[arg(long)]
    seed: Option<u64>,
    /// Result vector file.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-cycle CSV file; stdout if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorArg {
    Laplacian,
    Cd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartArg {
    Ones,
    Random,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// s32, gamma, sqrt or fracdiff.
    #[arg(long)]
    experiment: String,
    /// Comma-separated grid sizes (node counts for fracdiff).
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value = "laplacian")]
    operator: OperatorArg,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, value_enum, default_value = "ones")]
    start: StartArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_cycles: usize,
    /// CSV file; stdout if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// How a command finished when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    MaxCycles,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => gen::gen(&args).map(|_| Outcome::Converged),
        Command::Run(args) => run::run(&args),
        Command::Bench(args) => bench::bench(&args),
    };
    match result {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::MaxCycles) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
