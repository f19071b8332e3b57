use crate::config::{LinearSolver, RunConfig};
use crate::error::CliError;
use crate::svg::{Plot, Series};
use crate::table::{write_table, Cell};
use cpm_schwarz::band::{assemble_rhs, discretize, restrict_to_curve};
use cpm_schwarz::curve::Curve;
use cpm_schwarz::experiment::{self, log_linear_fit, run_ras, uniform_arclengths, Problem, RasReport, RasSettings};
use cpm_schwarz::schwarz::solve_single_domain;
use cpm_schwarz::sparsela::{self, relative_residual};
use cpm_schwarz::theory::{equal_sized_kappa, iteration_matrix, SchwarzConfig1D, SweepRow};
use std::path::PathBuf;

/// Iteration cap of the GMRES single-domain solve.
const GMRES_MAX_ITER: usize = 20_000;

pub fn ras_settings(cfg: &RunConfig, curve_length: f64) -> RasSettings {
    RasSettings {
        degree: cfg.degree,
        c: cfg.c,
        forcing: cfg.forcing,
        fractions: cfg.split,
        overlaps: cfg.overlaps(curve_length),
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        interface: cfg.interface,
    }
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    /// Creates the output directory and records the effective configuration in it.
    fn create(cfg: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.out)?;
        let mut out = Self { dir: cfg.out.clone(), written: Vec::new() };
        let path = out.path("run.conf");
        std::fs::write(&path, cfg.to_text())?;
        out.written.push(path);
        Ok(out)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), CliError> {
        let path = self.path(name);
        write_table(&path, header, rows)?;
        self.written.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, plot: &Plot) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, plot.render())?;
        self.written.push(path);
        Ok(())
    }
}

fn history_rows(history: &[f64]) -> Vec<Vec<Cell>> {
    history.iter().enumerate().map(|(n, &e)| vec![Cell::Int(n), Cell::Real(e)]).collect()
}

fn points_table(out: &mut Output, name: &str, points: &[(usize, Vec<f64>)]) -> Result<(), CliError> {
    let dim = points.first().map_or(2, |p| p.1.len());
    let header: Vec<&str> = ["subdomain", "x", "y", "z"].into_iter().take(1 + dim).collect();
    let rows = points
        .iter()
        .map(|(j, x)| std::iter::once(Cell::Int(j + 1)).chain(x.iter().map(|&v| Cell::Real(v))).collect())
        .collect();
    out.table(name, &header, rows)
}

/// Error curve `e_n / e_0` against the double iteration `n / 2`.
fn normalized_decay(history: &[f64]) -> Vec<(f64, f64)> {
    let e0 = history.first().copied().unwrap_or(1.0);
    history.iter().enumerate().map(|(n, &e)| (n as f64 / 2.0, e / e0)).collect()
}

fn bound_line(kappa: f64, double_iters: usize) -> Vec<(f64, f64)> {
    (0..=double_iters).map(|n| (n as f64, kappa.powi(n as i32))).collect()
}

fn summarize(report: &RasReport) -> String {
    let kappa = report.kappa_obs.map_or("n/a".to_string(), |k| format!("{k:.6}"));
    format!(
        "h = {}: {} unknowns, {} iterations, final error {:.3e}, kappa_obs = {kappa}, kappa_bound = {:.6}, rho^2 = {:.6}",
        report.h,
        report.unknowns,
        report.error_history.len() - 1,
        report.error_history.last().copied().unwrap_or(f64::NAN),
        report.kappa_bound,
        report.rho_squared
    )
}

/// Single-domain solve sampled at uniform arclengths, with the exact solution
/// of the manufactured problem alongside.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let curve = Curve::from_name(&cfg.curve)?;
    let length = curve.length();
    let (band, op) = discretize(&curve, cfg.h, cfg.degree, cfg.c)?;
    let rhs = assemble_rhs(&band, |s| cfg.forcing.eval(s, length));
    let u = match cfg.solver {
        LinearSolver::Direct => solve_single_domain(&op.matrix, &rhs)?,
        LinearSolver::Gmres => sparsela::solve(&op.matrix, &rhs, cfg.inner_tol, GMRES_MAX_ITER)?,
    };
    let residual = relative_residual(&op.matrix, &u, &rhs)?;
    let s = uniform_arclengths(length, cfg.samples);
    let values = restrict_to_curve(&band, &curve, &u, &s)?;

    let mut out = Output::create(cfg)?;
    let mut max_error = 0.0f64;
    let rows = s
        .iter()
        .zip(&values)
        .map(|(&s, &v)| {
            let exact = cfg.forcing.exact(s, length, cfg.c);
            max_error = max_error.max((v - exact).abs());
            vec![Cell::Real(s), Cell::Real(v), Cell::Real(exact), Cell::Real((v - exact).abs())]
        })
        .collect();
    out.table("solution.csv", &["s", "u", "exact", "abs_error"], rows)?;
    println!(
        "{} h = {}: {} unknowns, {} ghosts, {} solve, relative residual {residual:.2e}, max sampled error {max_error:.6e}",
        curve.name(),
        cfg.h,
        band.len(),
        band.ghost_count(),
        cfg.solver.name()
    );
    Ok(out.written)
}

/// One RAS run from a zero initial guess.
pub fn cmd_ras(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let curve = Curve::from_name(&cfg.curve)?;
    let settings = ras_settings(cfg, curve.length());
    let problem = Problem::new(&curve, cfg.h, cfg.degree, cfg.c, cfg.forcing)?;
    let report = run_ras(&problem, &settings)?;

    let mut out = Output::create(cfg)?;
    out.table("history.csv", &["iter", "error"], history_rows(&report.error_history))?;
    points_table(&mut out, "owned_points.csv", &report.owned_points)?;
    let decay = normalized_decay(&report.error_history);
    let plot = Plot {
        title: format!("RAS error on {}, h = {}", curve.name(), cfg.h),
        x_label: "double iteration".into(),
        y_label: "relative max-norm error".into(),
        log_y: true,
        series: vec![
            Series::solid(format!("h = {}", cfg.h), decay),
            Series::dashed("kappa_bound^n", bound_line(report.kappa_bound, report.error_history.len() / 2)),
        ],
    };
    out.svg("history.svg", &plot)?;
    println!("{}", summarize(&report));
    Ok(out.written)
}

/// Reports the periodic iteration matrix for the configured split and overlaps;
/// with `sweep`, also tabulates it over `cfg.deltas`.
pub fn cmd_theory(cfg: &RunConfig, sweep: bool) -> Result<Vec<PathBuf>, CliError> {
    let curve = Curve::from_name(&cfg.curve)?;
    let length = curve.length();
    let [d1, d2] = cfg.overlaps(length);
    let config = SchwarzConfig1D::from_split(cfg.c, length, cfg.split[0], d1, d2)?;
    let m = iteration_matrix(&config)?;
    let row = SweepRow::evaluate(&config)?;

    println!(
        "c = {}, L = {length:.12}, l1 = {:.12}, l2 = {:.12}, d1 = {:.12}, d2 = {:.12}",
        cfg.c, row.l1, row.l2, row.d1, row.d2
    );
    for (j, e) in [m.first, m.second].iter().enumerate() {
        println!("subdomain {}: p = {:.15}, q = {:.15}, r = {:.15}, s = {:.15}", j + 1, e.p, e.q, e.r, e.s);
    }
    println!("M =");
    for r in m.to_array() {
        println!("  [{}]", r.iter().map(|v| format!("{v:.15}")).collect::<Vec<_>>().join(", "));
    }
    println!("inf_norm = {:.15}\nrho = {:.15}\nkappa_bound = {:.15}", row.inf_norm, row.rho, row.kappa_bound);

    let tol = 1e-12 * length;
    if (row.l1 - row.l2).abs() <= tol && (row.d1 - row.d2).abs() <= tol {
        let pr = m.first.p + m.first.r;
        let dev = m.row_sums().into_iter().chain(m.column_sums()).map(|v| (v - pr).abs()).fold(0.0, f64::max);
        let status = if dev <= 1e-12 { "PASS" } else { "FAIL" };
        println!("doubly stochastic with sums p + r = {pr:.15}: {status} (max deviation {dev:.2e})");
        let closed = equal_sized_kappa(cfg.c, length, row.d1)?;
        println!("equal-split closed form = {closed:.15} (difference {:.2e})", (closed - row.kappa_bound).abs());
    }

    let mut written = Vec::new();
    if sweep {
        let mut out = Output::create(cfg)?;
        let mut rows = Vec::new();
        for delta in &cfg.deltas {
            let d = delta.resolve(length);
            match SchwarzConfig1D::from_split(cfg.c, length, cfg.split[0], d, d).and_then(|c| SweepRow::evaluate(&c)) {
                Ok(r) => rows.push(r.values().into_iter().map(Cell::Real).collect()),
                Err(e) => log::warn!("skipping overlap {delta}: {e}"),
            }
        }
        out.table("theory_sweep.csv", &SweepRow::HEADER, rows)?;
        written = out.written;
    }
    Ok(written)
}

fn tag(h: f64) -> String {
    format!("h{h}")
}

/// RAS convergence study over `cfg.hs`, with the bound `kappa_bound^n` overlaid.
pub fn cmd_experiment_mobius(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let curve = Curve::from_name(&cfg.curve)?;
    let settings = ras_settings(cfg, curve.length());
    let mut out = Output::create(cfg)?;
    let mut reports = Vec::new();
    for &h in &cfg.hs {
        let report = experiment::mobius_experiment(&curve, &[h], &settings)?.remove(0);
        println!("{}", summarize(&report));
        out.table(&format!("history_{}.csv", tag(h)), &["iter", "error"], history_rows(&report.error_history))?;
        points_table(&mut out, &format!("owned_points_{}.csv", tag(h)), &report.owned_points)?;
        reports.push(report);
    }

    let Some(first) = reports.first() else {
        return Ok(out.written);
    };
    let kappa = first.kappa_bound;
    let longest = reports.iter().map(|r| r.error_history.len()).max().unwrap_or(1);
    let line = bound_line(kappa, longest / 2);
    out.table(
        "bound.csv",
        &["double_iter", "kappa_bound_pow"],
        line.iter().map(|&(n, v)| vec![Cell::Int(n as usize), Cell::Real(v)]).collect(),
    )?;

    let summary = reports
        .iter()
        .map(|r| {
            let (slope, _, corr) = log_linear_fit(&r.error_history, 2).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            vec![
                Cell::Real(r.h),
                Cell::Int(r.unknowns),
                Cell::Int(r.error_history.len() - 1),
                Cell::Real(r.kappa_obs.unwrap_or(f64::NAN)),
                Cell::Real(r.kappa_bound),
                Cell::Real(r.rho_squared),
                Cell::Real((2.0 * slope).exp()),
                Cell::Real(corr.abs()),
            ]
        })
        .collect();
    out.table(
        "summary.csv",
        &["h", "unknowns", "iterations", "kappa_obs", "kappa_bound", "rho_squared", "kappa_fit", "abs_corr"],
        summary,
    )?;

    let mut series: Vec<Series> =
        reports.iter().map(|r| Series::solid(format!("h = {}", r.h), normalized_decay(&r.error_history))).collect();
    series.push(Series::dashed("kappa_bound^n", line));
    let plot = Plot {
        title: format!("RAS error on {}", curve.name()),
        x_label: "double iteration".into(),
        y_label: "relative max-norm error".into(),
        log_y: true,
        series,
    };
    out.svg("convergence.svg", &plot)?;
    Ok(out.written)
}

/// Equal-split overlap sweep; inadmissible overlaps are skipped with a warning.
pub fn cmd_experiment_circle_overlap(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let curve = Curve::from_name(&cfg.curve)?;
    let length = curve.length();
    let settings = ras_settings(cfg, length);
    let deltas: Vec<f64> = cfg.deltas.iter().map(|d| d.resolve(length)).collect();
    let cells = experiment::overlap_sweep(&curve, &cfg.hs, &deltas, &settings)?;

    let mut out = Output::create(cfg)?;
    let rows = cells
        .iter()
        .map(|c| vec![Cell::Real(c.h), Cell::Real(c.delta), Cell::Real(c.kappa_obs), Cell::Real(c.kappa_theory)])
        .collect();
    out.table("overlap_sweep.csv", &["h", "delta", "kappa_obs", "kappa_theory"], rows)?;
    for c in &cells {
        println!(
            "h = {}, delta = {:.4}L: kappa_obs = {:.6}, kappa_theory = {:.6}, {} iterations",
            c.h,
            c.delta / length,
            c.kappa_obs,
            c.kappa_theory,
            c.iterations
        );
    }

    let mut series: Vec<Series> = cfg
        .hs
        .iter()
        .map(|&h| {
            let pts = cells.iter().filter(|c| c.h == h).map(|c| (c.delta / length, c.kappa_obs)).collect();
            Series::solid(format!("h = {h}"), pts)
        })
        .collect();
    let (lo, hi) = deltas.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if lo < hi {
        let theory = (0..=100)
            .filter_map(|k| {
                let d = lo + (hi - lo) * k as f64 / 100.0;
                equal_sized_kappa(cfg.c, length, d).ok().map(|v| (d / length, v))
            })
            .collect();
        series.push(Series::dashed("theory", theory));
    }
    let plot = Plot {
        title: format!("Contraction factor against overlap on {}", curve.name()),
        x_label: "delta / L".into(),
        y_label: "kappa".into(),
        log_y: false,
        series,
    };
    out.svg("overlap_sweep.svg", &plot)?;
    Ok(out.written)
}

pub fn report_written(files: &[PathBuf]) {
    for f in files {
        log::info!("wrote {}", f.display());
    }
}
