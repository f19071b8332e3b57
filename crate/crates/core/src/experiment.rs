//! End-to-end runs: single-domain solves, RAS convergence studies and the
//! overlap sweep on the circle.

use crate::band::{assemble_rhs, discretize, restrict_to_curve, Band, BandError, DiscreteOperator};
use crate::curve::{Curve, CurveError};
use crate::schwarz::{make_partition, observed_kappa, ras_solve, solve_single_domain, Interface, RasSolver, SchwarzError};
use crate::theory::{kappa_bound, rho_squared, TheoryError};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Band(#[from] BandError),
    #[error(transparent)]
    Schwarz(#[from] SchwarzError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("unknown forcing {0:?} (expected sin-mode-<k>, zero or one)")]
    UnknownForcing(String),
}

/// Right-hand side as a function of arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    /// `sin(2 pi k s / L)`.
    SinMode(u32),
    Zero,
    One,
}

impl Forcing {
    pub fn eval(&self, s: f64, length: f64) -> f64 {
        match *self {
            Forcing::SinMode(k) => (TAU * k as f64 * s / length).sin(),
            Forcing::Zero => 0.0,
            Forcing::One => 1.0,
        }
    }

    /// Exact solution of `c u - u_ss = f` on a closed curve of length `length`.
    pub fn exact(&self, s: f64, length: f64, c: f64) -> f64 {
        match *self {
            Forcing::SinMode(k) => {
                let w = TAU * k as f64 / length;
                self.eval(s, length) / (c + w * w)
            }
            Forcing::Zero => 0.0,
            Forcing::One => 1.0 / c,
        }
    }
}

impl fmt::Display for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::SinMode(k) => write!(f, "sin-mode-{k}"),
            Forcing::Zero => f.write_str("zero"),
            Forcing::One => f.write_str("one"),
        }
    }
}

impl FromStr for Forcing {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(Forcing::Zero),
            "one" => Ok(Forcing::One),
            _ => s
                .strip_prefix("sin-mode-")
                .and_then(|k| k.parse().ok())
                .map(Forcing::SinMode)
                .ok_or_else(|| ExperimentError::UnknownForcing(s.to_string())),
        }
    }
}

/// A discretized problem with its single-domain reference solution.
#[derive(Debug, Clone)]
pub struct Problem {
    pub band: Band,
    pub op: DiscreteOperator,
    pub rhs: Vec<f64>,
    pub single: Vec<f64>,
}

impl Problem {
    pub fn new(curve: &Curve, h: f64, degree: usize, c: f64, forcing: Forcing) -> Result<Self, ExperimentError> {
        let (band, op) = discretize(curve, h, degree, c)?;
        let length = curve.length();
        let rhs = assemble_rhs(&band, |s| forcing.eval(s, length));
        let single = solve_single_domain(&op.matrix, &rhs)?;
        log::info!("h = {h}: {} unknowns, {} ghosts, {} nonzeros", band.len(), band.ghost_count(), op.matrix.nnz());
        Ok(Self { band, op, rhs, single })
    }
}

/// `n` equally spaced arclengths `k L / n`.
pub fn uniform_arclengths(length: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * length / n as f64).collect()
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub h: f64,
    pub unknowns: usize,
    pub arclengths: Vec<f64>,
    pub values: Vec<f64>,
    pub exact: Vec<f64>,
    pub max_error: f64,
}

/// Single-domain solve sampled at `samples` uniform arclengths.
pub fn solve_on_curve(
    curve: &Curve,
    h: f64,
    degree: usize,
    c: f64,
    forcing: Forcing,
    samples: usize,
) -> Result<SolveReport, ExperimentError> {
    let problem = Problem::new(curve, h, degree, c, forcing)?;
    let length = curve.length();
    let arclengths = uniform_arclengths(length, samples);
    let values = restrict_to_curve(&problem.band, curve, &problem.single, &arclengths)?;
    let exact: Vec<f64> = arclengths.iter().map(|&s| forcing.exact(s, length, c)).collect();
    let max_error = values.iter().zip(&exact).map(|(u, e)| (u - e).abs()).fold(0.0, f64::max);
    Ok(SolveReport { h, unknowns: problem.band.len(), arclengths, values, exact, max_error })
}

/// Parameters of one RAS convergence run.
#[derive(Debug, Clone, PartialEq)]
pub struct RasSettings {
    pub degree: usize,
    pub c: f64,
    pub forcing: Forcing,
    pub fractions: [f64; 2],
    /// Absolute overlaps `(delta_1, delta_2)`.
    pub overlaps: [f64; 2],
    /// Stop once `max |u^n - u_single| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub interface: Interface,
}

#[derive(Debug, Clone)]
pub struct RasReport {
    pub h: f64,
    pub unknowns: usize,
    pub error_history: Vec<f64>,
    pub kappa_obs: Option<f64>,
    pub kappa_bound: f64,
    pub rho_squared: f64,
    /// Owned points per subdomain as (subdomain, coordinates).
    pub owned_points: Vec<(usize, Vec<f64>)>,
}

/// Runs RAS from `u0 = 0` on an assembled problem.
pub fn run_ras(problem: &Problem, settings: &RasSettings) -> Result<RasReport, ExperimentError> {
    let band = &problem.band;
    let part = make_partition(band, &problem.op.matrix, settings.fractions, settings.overlaps)?;
    let cfg = part.config_1d(settings.c)?;
    let solver = RasSolver::new(&problem.op, &part, settings.interface)?;
    let u0 = vec![0.0; band.len()];
    let run = ras_solve(&solver, &problem.rhs, &problem.single, &u0, settings.tol, settings.max_iter)?;
    let kappa_obs = observed_kappa(&run.error_history).ok();
    let owner = part.owner_of();
    let owned_points = (0..band.len()).map(|g| (owner[g], band.coordinates(g))).collect();
    Ok(RasReport {
        h: band.h(),
        unknowns: band.len(),
        kappa_obs,
        kappa_bound: kappa_bound(&cfg)?,
        rho_squared: rho_squared(&cfg)?,
        error_history: run.error_history,
        owned_points,
    })
}

/// Least-squares line through `(n, ln e_n)` for `n >= start`: (slope, intercept, correlation).
pub fn log_linear_fit(history: &[f64], start: usize) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> =
        history.iter().enumerate().skip(start).filter(|(_, &e)| e > 0.0).map(|(n, &e)| (n as f64, e.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let corr = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    Some((slope, my - slope * mx, corr))
}

/// Default grid spacings of the Moebius study.
pub const MOBIUS_SPACINGS: [f64; 3] = [0.05, 0.02, 0.01];
/// Default grid spacings of the circle overlap sweep.
pub const CIRCLE_SPACINGS: [f64; 3] = [0.05, 0.01, 0.005];

/// Moebius-boundary defaults: `p = 4`, `c = 1`, `f = sin(2 pi s / L)`, a 1:2 split, overlaps `0.1 L`.
pub fn mobius_settings(length: f64) -> RasSettings {
    RasSettings {
        degree: 4,
        c: 1.0,
        forcing: Forcing::SinMode(1),
        fractions: [1.0 / 3.0, 2.0 / 3.0],
        overlaps: [0.1 * length, 0.1 * length],
        tol: 1e-10,
        max_iter: 200,
        interface: Interface::Algebraic,
    }
}

/// RAS convergence study over several grid spacings.
pub fn mobius_experiment(curve: &Curve, spacings: &[f64], settings: &RasSettings) -> Result<Vec<RasReport>, ExperimentError> {
    spacings
        .iter()
        .map(|&h| {
            let problem = Problem::new(curve, h, settings.degree, settings.c, settings.forcing)?;
            let report = run_ras(&problem, settings)?;
            log::info!("h = {h}: {} iterations, kappa_obs = {:?}", report.error_history.len() - 1, report.kappa_obs);
            Ok(report)
        })
        .collect()
}

/// Ten overlaps evenly spaced in `[0.02 L, 0.2 L]`.
pub fn default_sweep_overlaps(length: f64) -> Vec<f64> {
    (0..10).map(|k| (0.02 + 0.02 * k as f64) * length).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub h: f64,
    pub delta: f64,
    pub kappa_obs: f64,
    pub kappa_theory: f64,
    pub iterations: usize,
}

/// Equal split with `delta_1 = delta_2 = delta` for each overlap and spacing.
/// Overlaps rejected by the partition are skipped with a warning.
pub fn overlap_sweep(
    curve: &Curve,
    spacings: &[f64],
    overlaps: &[f64],
    settings: &RasSettings,
) -> Result<Vec<SweepCell>, ExperimentError> {
    let mut cells = Vec::new();
    for &h in spacings {
        let problem = Problem::new(curve, h, settings.degree, settings.c, settings.forcing)?;
        for &delta in overlaps {
            let s = RasSettings { fractions: [0.5, 0.5], overlaps: [delta, delta], ..settings.clone() };
            let report = match run_ras(&problem, &s) {
                Ok(r) => r,
                Err(ExperimentError::Schwarz(
                    e @ (SchwarzError::InvalidOverlap { .. } | SchwarzError::OverlapTooNarrow { .. }),
                )) => {
                    log::warn!("skipping h = {h}, delta = {delta}: {e}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            let Some(kappa_obs) = report.kappa_obs else {
                log::warn!("skipping h = {h}, delta = {delta}: history too short for a contraction estimate");
                continue;
            };
            cells.push(SweepCell {
                h,
                delta,
                kappa_obs,
                kappa_theory: report.kappa_bound,
                iterations: report.error_history.len() - 1,
            });
        }
    }
    Ok(cells)
}
