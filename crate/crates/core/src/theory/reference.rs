use super::{SchwarzConfig1D, TheoryError};
use crate::sparsela::{norm_inf, BandLu, CsrMatrix};

/// Iterates and errors of the finite-difference periodic reference iteration.
#[derive(Debug, Clone)]
pub struct Reference1D {
    /// Grid arclengths `s_i = i L / N`.
    pub grid: Vec<f64>,
    pub single: Vec<f64>,
    /// `iterates[n]` is `u^n`, starting with the initial guess.
    pub iterates: Vec<Vec<f64>>,
    /// `max |u^n - single|`.
    pub error_history: Vec<f64>,
}

struct Local {
    /// Periodic grid indices from the left Dirichlet node to the right one.
    nodes: Vec<usize>,
    lu: BandLu,
}

fn periodic_operator(n: usize, c: f64, h: f64) -> Result<CsrMatrix, TheoryError> {
    let (diag, off) = (c + 2.0 / (h * h), -1.0 / (h * h));
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, diag));
        t.push((i, (i + 1) % n, off));
        t.push((i, (i + n - 1) % n, off));
    }
    Ok(CsrMatrix::from_triplets(n, n, &t)?)
}

/// Tridiagonal Dirichlet problem on `m` interior nodes.
fn dirichlet_operator(m: usize, c: f64, h: f64) -> Result<CsrMatrix, TheoryError> {
    let (diag, off) = (c + 2.0 / (h * h), -1.0 / (h * h));
    let mut t = Vec::with_capacity(3 * m);
    for i in 0..m {
        t.push((i, i, diag));
        if i > 0 {
            t.push((i, i - 1, off));
        }
        if i + 1 < m {
            t.push((i, i + 1, off));
        }
    }
    Ok(CsrMatrix::from_triplets(m, m, &t)?)
}

/// Second-order finite-difference parallel Schwarz on the periodic grid
/// `s_i = i L / N`, `N = round(L / h)`, with Dirichlet exchange at the grid
/// nodes nearest `a_j` and `b_j`. The global iterate takes subdomain 1's
/// values on `[b_2 - L, a_2)` shifted to the midpoints of the overlaps and
/// subdomain 2's elsewhere.
pub fn reference_ras_1d(
    cfg: &SchwarzConfig1D,
    f: impl Fn(f64) -> f64,
    h: f64,
    u0: Option<&[f64]>,
    n_iters: usize,
) -> Result<Reference1D, TheoryError> {
    let l = cfg.length;
    let n = (l / h).round() as usize;
    if n < 8 {
        return Err(TheoryError::InvalidParameter(format!("h = {h} leaves only {n} cells")));
    }
    let h = l / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let rhs: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
    let single = BandLu::factor(&periodic_operator(n, cfg.c, h)?)?.solve(&rhs)?;

    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    let make_local = |a: f64, b: f64| -> Result<Local, TheoryError> {
        let (lo, hi) = ((a / h).round() as i64, (b / h).round() as i64);
        if hi - lo < 2 || (hi - lo) as usize >= n {
            return Err(TheoryError::InvalidParameter(format!("subdomain [{a}, {b}] does not fit the grid")));
        }
        let nodes: Vec<usize> = (lo..=hi).map(wrap).collect();
        let lu = BandLu::factor(&dirichlet_operator(nodes.len() - 2, cfg.c, h)?)?;
        Ok(Local { nodes, lu })
    };
    let locals = [make_local(cfg.a1, cfg.b1)?, make_local(cfg.a2, cfg.b2)?];

    // subdomain 2 owns [mid_12, mid_21 + L), subdomain 1 the rest
    let mid_12 = 0.5 * (cfg.a2 + cfg.b1);
    let mid_21 = 0.5 * (cfg.a1 + l + cfg.b2) - l;
    let owner: Vec<usize> = grid.iter().map(|&s| if s >= mid_12 && s < mid_21 + l { 1 } else { 0 }).collect();

    let mut u = match u0 {
        Some(v) if v.len() != n => {
            return Err(TheoryError::InvalidParameter(format!("initial guess has {} values, grid has {n}", v.len())))
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let err = |u: &[f64]| norm_inf(&u.iter().zip(&single).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut iterates = vec![u.clone()];
    let mut error_history = vec![err(&u)];
    let inv_h2 = 1.0 / (h * h);
    for _ in 0..n_iters {
        let mut next = vec![0.0; n];
        for (j, local) in locals.iter().enumerate() {
            let m = local.nodes.len() - 2;
            let mut b: Vec<f64> = local.nodes[1..=m].iter().map(|&i| rhs[i]).collect();
            b[0] += inv_h2 * u[local.nodes[0]];
            b[m - 1] += inv_h2 * u[local.nodes[m + 1]];
            let x = local.lu.solve(&b)?;
            for (&i, &v) in local.nodes[1..=m].iter().zip(&x) {
                if owner[i] == j {
                    next[i] = v;
                }
            }
        }
        u = next;
        error_history.push(err(&u));
        iterates.push(u.clone());
    }
    Ok(Reference1D { grid, single, iterates, error_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn single_domain_matches_fourier_mode() {
        let cfg = SchwarzConfig1D::equal(1.0, TAU, 0.1 * TAU).unwrap();
        let run = reference_ras_1d(&cfg, |s| s.sin(), 1e-2 * TAU, None, 0).unwrap();
        let err = run.grid.iter().zip(&run.single).map(|(s, u)| (u - 0.5 * s.sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn single_domain_solution_is_a_fixed_point() {
        let cfg = SchwarzConfig1D::from_split(2.0, 5.0, 0.3, 0.6, 0.4).unwrap();
        let f = |s: f64| (s * 1.3).cos() + 0.2;
        let first = reference_ras_1d(&cfg, f, 0.01, None, 0).unwrap();
        let run = reference_ras_1d(&cfg, f, 0.01, Some(&first.single), 3).unwrap();
        assert!(run.error_history.iter().all(|&e| e <= 1e-8));
    }

    #[test]
    fn errors_contract() {
        let cfg = SchwarzConfig1D::equal(1.0, TAU, 0.1 * TAU).unwrap();
        let run = reference_ras_1d(&cfg, |s| s.sin(), 1e-3 * TAU, None, 10).unwrap();
        assert!(run.error_history.windows(2).all(|w| w[1] < w[0]));
    }
}
