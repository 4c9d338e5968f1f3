//! Restarted Arnoldi approximation of `F(A) b` for Laplace transforms,
//! two-sided Laplace transforms, complete Bernstein functions and Stieltjes
//! functions of large sparse matrices.

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod operators;
pub mod quadrature;
pub mod reference;
pub mod restart;
pub mod smallmat;
pub mod spline;
mod vecops;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use error::{Error, Result};
pub use operators::{Counted, DenseOperator, Graph, LinearOperator, SparseMatrix};
pub use vecops::relative_error;
