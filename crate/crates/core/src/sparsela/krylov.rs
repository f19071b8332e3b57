//! Restarted GMRES with right preconditioning.

use super::{CsrMatrix, SparseError};

/// Approximate inverse applied on the right: `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// No preconditioning.
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Jacobi scaling by the inverse diagonal. Falls back to the identity when
/// any diagonal entry is zero.
pub struct JacobiPreconditioner {
    inv_diag: Option<Vec<f64>>,
}

impl JacobiPreconditioner {
    pub fn new(a: &CsrMatrix) -> Self {
        let diag = a.diagonal_values();
        let inv_diag = if diag.contains(&0.0) {
            None
        } else {
            Some(diag.iter().map(|d| 1.0 / d).collect())
        };
        Self { inv_diag }
    }

    pub fn is_identity(&self) -> bool {
        self.inv_diag.is_none()
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match &self.inv_diag {
            Some(d) => z.iter_mut().zip(r.iter().zip(d)).for_each(|(z, (r, d))| *z = r * d),
            None => z.copy_from_slice(r),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Relative residual target `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    /// Cap on the total number of inner (Arnoldi) iterations.
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 10_000, restart: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual recomputed from `b - A x`.
    pub relative_residual: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.matvec_into(x, r).expect("dimensions checked by caller");
    r.iter_mut().zip(b).for_each(|(r, b)| *r = b - *r);
}

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: &dyn Preconditioner,
    opts: &GmresOptions,
) -> Result<GmresOutcome, SparseError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SparseError::NotSquare { nrows: n, ncols: a.ncols() });
    }
    if b.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(SparseError::DimensionMismatch { op: "gmres", left: (n, n), right: (b.len(), 1) });
    }
    if !(opts.tol > 0.0) {
        return Err(SparseError::InvalidTolerance(opts.tol));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let m = opts.restart.max(1);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut hess = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    let mut total = 0usize;

    residual(a, &x, b, &mut r);
    let mut rel = norm2(&r) / bnorm;
    loop {
        if rel <= opts.tol {
            return Ok(GmresOutcome { x, iterations: total, relative_residual: rel });
        }
        if total >= opts.max_iter {
            return Err(SparseError::NoConvergence { iterations: total, residual: rel });
        }
        let beta = norm2(&r);
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k = 0;
        while k < m && total < opts.max_iter {
            precond.apply(&basis[k], &mut z);
            a.matvec_into(&z, &mut w).expect("square");
            for (i, v) in basis.iter().enumerate() {
                let h = dot(&w, v);
                hess[i][k] = h;
                w.iter_mut().zip(v).for_each(|(w, v)| *w -= h * v);
            }
            let hnext = norm2(&w);
            hess[k + 1][k] = hnext;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hess[k][k] / denom;
                sn[k] = hess[k + 1][k] / denom;
            }
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            let estimate = g[k].abs() / bnorm;
            if estimate <= 0.5 * opts.tol || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // back-substitute the k x k triangular system and update x
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
            y[i] = if hess[i][i] != 0.0 { (g[i] - s) / hess[i][i] } else { 0.0 };
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, v)| *u += yi * v);
        }
        precond.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(x, z)| *x += z);
        residual(a, &x, b, &mut r);
        rel = norm2(&r) / bnorm;
    }
}

/// Solves `A x = b` with restarted GMRES(50) and right Jacobi preconditioning.
pub fn solve(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, SparseError> {
    let precond = JacobiPreconditioner::new(a);
    let opts = GmresOptions { tol, max_iter, restart: 50 };
    gmres(a, b, None, &precond, &opts).map(|o| o.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_returns_rhs() {
        let b = vec![3.0, -1.0, 0.5];
        let x = solve(&CsrMatrix::identity(3), &b, 1e-12, 10).unwrap();
        for (x, b) in x.iter().zip(&b) {
            assert!((x - b).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system() {
        let a = CsrMatrix::diagonal(&[2.0, 4.0]);
        let x = solve(&a, &[2.0, 8.0], 1e-12, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let x = solve(&CsrMatrix::identity(4), &[0.0; 4], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn zero_diagonal_falls_back_to_identity_preconditioner() {
        // [[0,1],[1,0]] x = (1,2) -> x = (2,1)
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(JacobiPreconditioner::new(&a).is_identity());
        let x = solve(&a, &[1.0, 2.0], 1e-12, 10).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_no_convergence() {
        // 1D Laplacian-like system that cannot converge in 2 iterations
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b = vec![1.0; n];
        match solve(&a, &b, 1e-12, 2) {
            Err(SparseError::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(matches!(
            solve(&CsrMatrix::identity(2), &[1.0, 1.0], 0.0, 10),
            Err(SparseError::InvalidTolerance(_))
        ));
    }
}
