use std::io::{self, BufWriter};

use anyhow::{bail, Context, Result};

use lkv_core::operators::{
    convection_diffusion_nd, graph_laplacian, laplacian_nd, largest_connected_component,
    random_graph, read_graph, write_matrix_market, write_matrix_market_to,
};
use lkv_core::SparseMatrix;

use crate::{GenArgs, MatrixKind};

pub fn build(args: &GenArgs) -> Result<SparseMatrix> {
    let grid = |d: usize| -> Result<(usize, usize)> {
        let n = args.n.context("--n is required for grid operators")?;
        Ok((n, d))
    };
    let a = match args.kind {
        MatrixKind::Laplacian1d | MatrixKind::Laplacian2d | MatrixKind::Laplacian3d => {
            let d = match args.kind {
                MatrixKind::Laplacian1d => 1,
                MatrixKind::Laplacian2d => 2,
                _ => 3,
            };
            let (n, d) = grid(d)?;
            laplacian_nd(n, d)?
        }
        MatrixKind::Cd1d | MatrixKind::Cd2d | MatrixKind::Cd3d => {
            let d = match args.kind {
                MatrixKind::Cd1d => 1,
                MatrixKind::Cd2d => 2,
                _ => 3,
            };
            let (n, d) = grid(d)?;
            convection_diffusion_nd(n, args.eps, d)?
        }
        MatrixKind::Graph => {
            let path = args.input.as_ref().context("--input is required for --kind graph")?;
            let mut g = read_graph(path).with_context(|| format!("reading {}", path.display()))?;
            if args.lcc {
                g = largest_connected_component(&g)?;
            }
            graph_laplacian(&g)
        }
        MatrixKind::RandomGraph => {
            let n = args.n.context("--n is required for random-graph")?;
            let mut g = random_graph(n, args.edges.unwrap_or(2 * n), args.seed)?;
            if args.lcc {
                g = largest_connected_component(&g)?;
            }
            graph_laplacian(&g)
        }
    };
    if args.input.is_some() && args.kind != MatrixKind::Graph {
        bail!("--input only applies to --kind graph");
    }
    Ok(a)
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let a = build(args)?;
    match &args.output {
        Some(path) => write_matrix_market(&a, path).with_context(|| format!("writing {}", path.display()))?,
        None => write_matrix_market_to(&a, BufWriter::new(io::stdout().lock()))?,
    }
    eprintln!("{}x{} matrix, {} nonzeros", a.dim(), a.dim(), a.nnz());
    Ok(())
}
