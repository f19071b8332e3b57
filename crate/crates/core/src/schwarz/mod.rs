//! Two-subdomain restricted additive Schwarz on a closest point band.
//!
//! Band points are assigned to subdomains by the arclength of their closest
//! point. Each subdomain solves its local problem with Dirichlet data taken
//! from the previous iterate and contributes only its owned points.

mod partition;

pub use partition::{in_periodic_interval, make_partition, Partition};

use crate::band::DiscreteOperator;
use crate::sparsela::{norm_inf, BandLu, CsrMatrix, RowBuilder, SparseError};
use std::collections::HashMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchwarzError {
    #[error("overlaps d1 = {d1}, d2 = {d2} violate 0 < d1 + d2 < min(l1, l2) = {min_len}")]
    InvalidOverlap { d1: f64, d2: f64, min_len: f64 },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("subdomain {0} has no interior points")]
    EmptySubdomain(usize),
    #[error("subdomain {subdomain}: {count} owned points lie on its interface layer")]
    OverlapTooNarrow { subdomain: usize, count: usize },
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least one ratio history[n+2]/history[n] above the roundoff floor")]
    InsufficientHistory,
    #[error("unknown interface condition {0:?}")]
    UnknownInterface(String),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// How subdomain problems receive data from the previous iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interface {
    /// All member rows of `A` are kept and couplings to non-member points
    /// are moved to the right-hand side using the previous iterate.
    #[default]
    Algebraic,
    /// Interface-layer rows become identity rows holding the previous iterate.
    Iterate,
}

impl Interface {
    pub fn name(self) -> &'static str {
        match self {
            Interface::Algebraic => "algebraic",
            Interface::Iterate => "iterate",
        }
    }
}

impl FromStr for Interface {
    type Err = SchwarzError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algebraic" => Ok(Interface::Algebraic),
            "iterate" => Ok(Interface::Iterate),
            other => Err(SchwarzError::UnknownInterface(other.to_string())),
        }
    }
}

struct LocalProblem {
    members: Vec<usize>,
    /// Local positions of interface rows (identity modes only).
    interface_rows: Vec<usize>,
    /// `A[members, non-members]`, global columns (algebraic mode only).
    coupling: CsrMatrix,
    /// (local position, global ordinal) of owned points.
    owned: Vec<(usize, usize)>,
    lu: BandLu,
}

/// Factored subdomain problems, reusable across iterations.
pub struct RasSolver {
    n: usize,
    interface: Interface,
    locals: Vec<LocalProblem>,
}

impl std::fmt::Debug for RasSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasSolver")
            .field("n", &self.n)
            .field("interface", &self.interface)
            .field("members", &self.locals.iter().map(|l| l.members.len()).collect::<Vec<_>>())
            .finish()
    }
}

impl RasSolver {
    pub fn new(op: &DiscreteOperator, partition: &Partition, interface: Interface) -> Result<Self, SchwarzError> {
        let a = &op.matrix;
        let n = a.nrows();
        if partition.point_count() != n {
            return Err(SchwarzError::LengthMismatch { expected: n, got: partition.point_count() });
        }
        let mut locals = Vec::with_capacity(2);
        for j in 0..2 {
            let members = partition.members[j].clone();
            let local_of: HashMap<usize, usize> = members.iter().enumerate().map(|(k, &g)| (g, k)).collect();
            let on_interface: Vec<bool> = {
                let mut flags = vec![false; members.len()];
                for g in &partition.boundary[j] {
                    flags[local_of[g]] = true;
                }
                flags
            };
            let owned: Vec<(usize, usize)> = partition.owned[j].iter().map(|&g| (local_of[&g], g)).collect();
            let identity_mode = interface != Interface::Algebraic;
            if identity_mode {
                let count = owned.iter().filter(|(k, _)| on_interface[*k]).count();
                if count > 0 {
                    return Err(SchwarzError::OverlapTooNarrow { subdomain: j, count });
                }
            }

            let mut local = RowBuilder::with_capacity(members.len(), members.len(), 0);
            let mut coupling = RowBuilder::with_capacity(members.len(), n, 0);
            for (k, &g) in members.iter().enumerate() {
                let (cols, vals) = a.row(g);
                if identity_mode && on_interface[k] {
                    local.push_sorted_row([(k, 1.0)]);
                    coupling.push_sorted_row(std::iter::empty());
                    continue;
                }
                let mut inside: Vec<(usize, f64)> = Vec::with_capacity(cols.len());
                let mut outside: Vec<(usize, f64)> = Vec::new();
                for (&c, &v) in cols.iter().zip(vals) {
                    match local_of.get(&c) {
                        Some(&lc) => inside.push((lc, v)),
                        None => outside.push((c, v)),
                    }
                }
                local.push_unsorted_row(&mut inside);
                coupling.push_sorted_row(outside);
            }
            let lu = BandLu::factor(&local.finish())?;
            let interface_rows = if identity_mode { (0..members.len()).filter(|&k| on_interface[k]).collect() } else { Vec::new() };
            locals.push(LocalProblem { members, interface_rows, coupling: coupling.finish(), owned, lu });
        }
        Ok(Self { n, interface, locals })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn interface(&self) -> Interface {
        self.interface
    }

    /// Bytes held by the local factorizations.
    pub fn storage_bytes(&self) -> usize {
        self.locals.iter().map(|l| l.lu.storage_bytes()).sum()
    }

    /// One RAS iteration `u_prev -> u_next`.
    pub fn step(&self, b: &[f64], u_prev: &[f64]) -> Result<Vec<f64>, SchwarzError> {
        for v in [b, u_prev] {
            if v.len() != self.n {
                return Err(SchwarzError::LengthMismatch { expected: self.n, got: v.len() });
            }
        }
        let mut next = vec![0.0; self.n];
        for local in &self.locals {
            let mut rhs: Vec<f64> = local.members.iter().map(|&g| b[g]).collect();
            match self.interface {
                Interface::Algebraic => {
                    let moved = local.coupling.matvec(u_prev)?;
                    rhs.iter_mut().zip(moved).for_each(|(r, m)| *r -= m);
                }
                Interface::Iterate => {
                    for &k in &local.interface_rows {
                        rhs[k] = u_prev[local.members[k]];
                    }
                }
            }
            let x = local.lu.solve(&rhs)?;
            for &(k, g) in &local.owned {
                next[g] = x[k];
            }
        }
        Ok(next)
    }
}

/// Builds the factored subdomain problems and applies one iteration.
pub fn ras_step(
    op: &DiscreteOperator,
    partition: &Partition,
    b: &[f64],
    u_prev: &[f64],
    interface: Interface,
) -> Result<Vec<f64>, SchwarzError> {
    RasSolver::new(op, partition, interface)?.step(b, u_prev)
}

#[derive(Debug, Clone)]
pub struct RasOutcome {
    pub u: Vec<f64>,
    /// `error_history[n] = max |u^n - u_single|`.
    pub error_history: Vec<f64>,
}

impl RasOutcome {
    pub fn iterations(&self) -> usize {
        self.error_history.len() - 1
    }
}

/// Iterates until the max-norm distance to `reference` is at most `tol`
/// or `max_iter` steps have been taken.
pub fn ras_solve(
    solver: &RasSolver,
    b: &[f64],
    reference: &[f64],
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<RasOutcome, SchwarzError> {
    if !(tol > 0.0) {
        return Err(SparseError::InvalidTolerance(tol).into());
    }
    for v in [reference, u0] {
        if v.len() != solver.dim() {
            return Err(SchwarzError::LengthMismatch { expected: solver.dim(), got: v.len() });
        }
    }
    let error = |u: &[f64]| norm_inf(&u.iter().zip(reference).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut u = u0.to_vec();
    let mut history = vec![error(&u)];
    while history.len() <= max_iter && *history.last().unwrap() > tol {
        u = solver.step(b, &u)?;
        history.push(error(&u));
        log::debug!("ras iteration {}: error {:e}", history.len() - 1, history.last().unwrap());
    }
    Ok(RasOutcome { u, error_history: history })
}

/// Geometric mean of `history[n+2] / history[n]`, over the history truncated
/// before its first entry below `1e3 * eps * history[0]`.
pub fn observed_kappa(history: &[f64]) -> Result<f64, SchwarzError> {
    let first = *history.first().ok_or(SchwarzError::InsufficientHistory)?;
    if !(first > 0.0) {
        return Err(SchwarzError::InsufficientHistory);
    }
    let floor = 1e3 * f64::EPSILON * first;
    let kept = history.iter().position(|&e| !(e >= floor) || e == 0.0).unwrap_or(history.len());
    let h = &history[..kept];
    if h.len() < 3 {
        return Err(SchwarzError::InsufficientHistory);
    }
    let logs: f64 = h.windows(3).map(|w| (w[2] / w[0]).ln()).sum();
    Ok((logs / (h.len() - 2) as f64).exp())
}

/// Single-domain direct solve with a few steps of iterative refinement.
pub fn solve_single_domain(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SchwarzError> {
    let lu = BandLu::factor(a)?;
    let mut x = lu.solve(b)?;
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        let ax = a.matvec(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        let rn = norm_inf(&r);
        if rn == 0.0 || rn >= 0.5 * last {
            break;
        }
        last = rn;
        let dx = lu.solve(&r)?;
        x.iter_mut().zip(dx).for_each(|(x, d)| *x += d);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::{assemble_rhs, discretize};
    use crate::curve::Curve;

    #[test]
    fn kappa_of_halving_history() {
        assert!((observed_kappa(&[1.0, 0.7, 0.5, 0.35, 0.25]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(observed_kappa(&[2.0; 6]).unwrap(), 1.0);
        assert!(observed_kappa(&[1.0, 0.5]).is_err());
        assert!(observed_kappa(&[1.0, 1e-20, 1e-30]).is_err());
        // entries below the roundoff floor are dropped
        let k = observed_kappa(&[1.0, 0.5, 0.25, 0.125, 1e-16, 1e-16]).unwrap();
        assert!((k - 0.25).abs() < 1e-15);
    }

    #[test]
    fn interface_names_round_trip() {
        for i in [Interface::Algebraic, Interface::Iterate] {
            assert_eq!(i.name().parse::<Interface>().unwrap(), i);
        }
        assert!("extension".parse::<Interface>().is_err());
    }

    #[test]
    fn single_domain_solution_is_fixed_point_and_errors_decrease() {
        let curve = Curve::unit_circle();
        let (band, op) = discretize(&curve, 0.05, 3, 1.0).unwrap();
        let l = curve.length();
        let b = assemble_rhs(&band, |s| (std::f64::consts::TAU * s / l).sin());
        let single = solve_single_domain(&op.matrix, &b).unwrap();
        let part = make_partition(&band, &op.matrix, [0.5, 0.5], [0.2 * l, 0.2 * l]).unwrap();
        for interface in [Interface::Algebraic, Interface::Iterate] {
            let solver = RasSolver::new(&op, &part, interface).unwrap();
            let u = solver.step(&b, &single).unwrap();
            let err = norm_inf(&u.iter().zip(&single).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err < 1e-9, "{interface:?}: {err}");
            assert!(solver.step(&vec![0.0; b.len()], &vec![0.0; b.len()]).unwrap().iter().all(|&v| v == 0.0));
            let run = ras_solve(&solver, &b, &single, &vec![0.0; b.len()], 1e-300, 5).unwrap();
            assert_eq!(run.error_history.len(), 6);
            assert!(run.error_history.windows(2).all(|w| w[1] < w[0]), "{interface:?}");
        }
        let solver = RasSolver::new(&op, &part, Interface::Algebraic).unwrap();
        let run = ras_solve(&solver, &b, &single, &single, 1e-9, 10).unwrap();
        assert_eq!(run.iterations(), 0);
    }
}
