//! Minimal sparse linear algebra: CSR storage, products, a restarted Krylov
//! solver and a banded direct factorization.

mod banded;
mod csr;
mod io;
mod krylov;

pub use banded::{bandwidths, reverse_cuthill_mckee, BandLu};
pub use csr::CsrMatrix;
pub(crate) use csr::RowBuilder;
pub use io::{from_triplet_text, to_triplet_text};
pub use krylov::{
    gmres, solve, GmresOptions, GmresOutcome, IdentityPreconditioner, JacobiPreconditioner, Preconditioner,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("triplet parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||A x - b||_2 / ||b||_2` (or the absolute residual when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64, SparseError> {
    let ax = a.matvec(x)?;
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let bn = norm2(b);
    Ok(if bn == 0.0 { r } else { r / bn })
}
