//! Two-subdomain Schwarz analysis for `c u - u'' = f` on a periodic interval.
//!
//! Subdomains are `S_1 = [a_1, b_1]` and `S_2 = [a_2, b_2]` with
//! `a_1 < 0 < a_2 < b_1 < L < b_2`. The boundary error vector is ordered
//! `[e_1(b_2 - L), e_1(a_2), e_2(b_1), e_2(a_1 + L)]`, and one parallel
//! Schwarz step maps it through the 4x4 matrix `M`.

mod reference;

pub use reference::{reference_ras_1d, Reference1D};

use thiserror::Error;

/// Largest `sqrt(c) * l` accepted by the exponential forms.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("overlaps d1 = {d1}, d2 = {d2} violate 0 < d1 + d2 < min(l1, l2) = {min_len}")]
    InvalidOverlap { d1: f64, d2: f64, min_len: f64 },
    #[error("sqrt(c) * l = {0} exceeds the supported range")]
    Overflow(f64),
    #[error(transparent)]
    Sparse(#[from] crate::sparsela::SparseError),
}

/// `sinh(a x) / sinh(a y)` for `0 <= x <= y`, `y > 0`.
fn sinh_ratio(a: f64, x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (a * (x - y)).exp() * (-2.0 * a * x).exp_m1() / (-2.0 * a * y).exp_m1()
}

/// Interval geometry of a periodic two-subdomain decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzConfig1D {
    pub c: f64,
    pub length: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl SchwarzConfig1D {
    pub fn new(c: f64, length: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self, TheoryError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(TheoryError::InvalidParameter(format!("c = {c} must be positive")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(TheoryError::InvalidParameter(format!("L = {length} must be positive")));
        }
        if !(a1 < 0.0 && 0.0 < a2 && a2 < b1 && b1 < length && length < b2) {
            return Err(TheoryError::InvalidParameter(format!(
                "need a1 < 0 < a2 < b1 < L < b2, got a1={a1} a2={a2} b1={b1} L={length} b2={b2}"
            )));
        }
        let cfg = Self { c, length, a1, b1, a2, b2 };
        let (d1, d2) = (cfg.delta1(), cfg.delta2());
        let min_len = cfg.l1().min(cfg.l2());
        if !(d1 > 0.0 && d2 > 0.0 && d1 + d2 < min_len) {
            return Err(TheoryError::InvalidOverlap { d1, d2, min_len });
        }
        Ok(cfg)
    }

    /// Subdomain 1 owns `[0, f1 L)`; each shared boundary is widened by half
    /// its overlap on either side, so `delta1` and `delta2` come out exactly.
    pub fn from_split(c: f64, length: f64, f1: f64, delta1: f64, delta2: f64) -> Result<Self, TheoryError> {
        if !(f1 > 0.0 && f1 < 1.0) {
            return Err(TheoryError::InvalidParameter(format!("split fraction {f1} must lie in (0, 1)")));
        }
        if !(delta1 > 0.0 && delta2 > 0.0) || delta1 + delta2 >= 2.0 * length * f1.min(1.0 - f1) {
            let min_len = length * f1.min(1.0 - f1) + 0.5 * (delta1 + delta2);
            return Err(TheoryError::InvalidOverlap { d1: delta1, d2: delta2, min_len });
        }
        let cut = f1 * length;
        Self::new(c, length, -0.5 * delta2, cut + 0.5 * delta1, cut - 0.5 * delta1, length + 0.5 * delta2)
    }

    /// Equal halves sharing the overlap `o` at both ends.
    pub fn equal(c: f64, length: f64, overlap: f64) -> Result<Self, TheoryError> {
        Self::from_split(c, length, 0.5, overlap, overlap)
    }

    pub fn l1(&self) -> f64 {
        self.b1 - self.a1
    }

    pub fn l2(&self) -> f64 {
        self.b2 - self.a2
    }

    pub fn delta1(&self) -> f64 {
        self.b1 - self.a2
    }

    pub fn delta2(&self) -> f64 {
        self.b2 - (self.a1 + self.length)
    }
}

/// The four entries `(p, q, r, s)` of one subdomain's block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntries {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

/// Entries for a subdomain of length `l` whose left overlap is `delta_prev`
/// and right overlap is `delta`.
pub fn entries(c: f64, l: f64, delta_prev: f64, delta: f64) -> Result<BlockEntries, TheoryError> {
    if !(c > 0.0) || !(l > 0.0) {
        return Err(TheoryError::InvalidParameter(format!("need c > 0 and l > 0, got c={c} l={l}")));
    }
    for d in [delta_prev, delta] {
        if !(0.0..=l).contains(&d) {
            return Err(TheoryError::InvalidParameter(format!("overlap {d} outside [0, {l}]")));
        }
    }
    let a = c.sqrt();
    if a * l > MAX_EXPONENT {
        return Err(TheoryError::Overflow(a * l));
    }
    Ok(BlockEntries {
        p: sinh_ratio(a, l - delta_prev, l),
        q: sinh_ratio(a, l - delta, l),
        r: sinh_ratio(a, delta_prev, l),
        s: sinh_ratio(a, delta, l),
    })
}

/// The 4x4 boundary-error iteration matrix with zero diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationMatrix {
    pub first: BlockEntries,
    pub second: BlockEntries,
}

pub fn iteration_matrix(cfg: &SchwarzConfig1D) -> Result<IterationMatrix, TheoryError> {
    Ok(IterationMatrix {
        first: entries(cfg.c, cfg.l1(), cfg.delta2(), cfg.delta1())?,
        second: entries(cfg.c, cfg.l2(), cfg.delta1(), cfg.delta2())?,
    })
}

impl IterationMatrix {
    pub fn to_array(&self) -> [[f64; 4]; 4] {
        let (e1, e2) = (self.first, self.second);
        [
            [0.0, 0.0, e1.r, e1.p],
            [0.0, 0.0, e1.q, e1.s],
            [e2.r, e2.p, 0.0, 0.0],
            [e2.q, e2.s, 0.0, 0.0],
        ]
    }

    pub fn apply(&self, v: &[f64; 4]) -> [f64; 4] {
        let m = self.to_array();
        std::array::from_fn(|i| (0..4).map(|j| m[i][j] * v[j]).sum())
    }

    pub fn row_sums(&self) -> [f64; 4] {
        self.to_array().map(|row| row.iter().map(|v| v.abs()).sum())
    }

    pub fn column_sums(&self) -> [f64; 4] {
        let m = self.to_array();
        std::array::from_fn(|j| (0..4).map(|i| m[i][j].abs()).sum())
    }

    pub fn inf_norm(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, f64::max)
    }

    /// `rho(M) = sqrt(rho(B C))` for `M = [[0, B], [C, 0]]`.
    pub fn spectral_radius(&self) -> f64 {
        let m = self.to_array();
        let b = [[m[0][2], m[0][3]], [m[1][2], m[1][3]]];
        let c = [[m[2][0], m[2][1]], [m[3][0], m[3][1]]];
        let bc = [
            [b[0][0] * c[0][0] + b[0][1] * c[1][0], b[0][0] * c[0][1] + b[0][1] * c[1][1]],
            [b[1][0] * c[0][0] + b[1][1] * c[1][0], b[1][0] * c[0][1] + b[1][1] * c[1][1]],
        ];
        let tr = bc[0][0] + bc[1][1];
        // tr^2/4 - det without cancellation
        let half_gap = 0.5 * (bc[0][0] - bc[1][1]);
        let disc = half_gap * half_gap + bc[0][1] * bc[1][0];
        let rho = if disc >= 0.0 {
            let root = disc.sqrt();
            (0.5 * tr + root).abs().max((0.5 * tr - root).abs())
        } else {
            // complex pair: |lambda|^2 = det
            (bc[0][0] * bc[1][1] - bc[0][1] * bc[1][0]).abs().sqrt()
        };
        rho.sqrt()
    }
}

/// Upper bound `||M||_inf^2` on the contraction per double iteration.
pub fn kappa_bound(cfg: &SchwarzConfig1D) -> Result<f64, TheoryError> {
    Ok(iteration_matrix(cfg)?.inf_norm().powi(2))
}

/// Asymptotic contraction per double iteration, `rho(M)^2`.
pub fn rho_squared(cfg: &SchwarzConfig1D) -> Result<f64, TheoryError> {
    Ok(iteration_matrix(cfg)?.spectral_radius().powi(2))
}

/// `(p + r)^2` for equal halves with overlap `o` at both ends, in closed form
/// `((e^{a o} + e^{a (l - o)}) / (1 + e^{a l}))^2`, `l = L/2 + o`, `a = sqrt(c)`.
pub fn equal_sized_kappa(c: f64, length: f64, overlap: f64) -> Result<f64, TheoryError> {
    if !(c > 0.0) || !(length > 0.0) {
        return Err(TheoryError::InvalidParameter(format!("need c > 0 and L > 0, got c={c} L={length}")));
    }
    let l = 0.5 * length + overlap;
    if !(overlap > 0.0 && 2.0 * overlap < l) {
        return Err(TheoryError::InvalidOverlap { d1: overlap, d2: overlap, min_len: l });
    }
    let a = c.sqrt();
    if a * l > MAX_EXPONENT {
        return Err(TheoryError::Overflow(a * l));
    }
    // divide through by e^{a l}
    let ratio = ((a * (overlap - l)).exp() + (-a * overlap).exp()) / ((-a * l).exp() + 1.0);
    Ok(ratio * ratio)
}

/// `(e^{a L/2} + e^{a d})^2 / (1 + e^{a (L/2 + d)})^2` as printed for equal
/// halves `[-d, L/2 + d]`, `[L/2 - d, L + d]`.
///
/// It coincides with [`equal_sized_kappa`] at overlap `o = d`, whereas those
/// intervals overlap by `2 d`.
pub fn printed_equal_split_kappa(c: f64, length: f64, d: f64) -> f64 {
    let a = c.sqrt();
    let t = 0.5 * length + d;
    let ratio = ((a * (0.5 * length - t)).exp() + (a * (d - t)).exp()) / ((-a * t).exp() + 1.0);
    ratio * ratio
}

/// Solution of `c e - e'' = 0` on `[a, b]` with `e(a) = alpha`, `e(b) = beta`, at `s`.
pub fn analytic_error_solve(c: f64, a: f64, b: f64, alpha: f64, beta: f64, s: f64) -> Result<f64, TheoryError> {
    if !(b > a) {
        return Err(TheoryError::InvalidParameter(format!("need b > a, got a={a} b={b}")));
    }
    if !(c > 0.0) {
        return Err(TheoryError::InvalidParameter(format!("c = {c} must be positive")));
    }
    let k = c.sqrt();
    let w = b - a;
    if k * w > MAX_EXPONENT {
        return Err(TheoryError::Overflow(k * w));
    }
    // sinh(k x)/sinh(k w) = (e^{k(x-w)} - e^{-k(x+w)}) / (1 - e^{-2kw})
    let denom = 1.0 - (-2.0 * k * w).exp();
    let basis = |x: f64| ((k * (x - w)).exp() - (-k * (x + w)).exp()) / denom;
    Ok(alpha * basis(b - s) + beta * basis(s - a))
}

/// Propagates a boundary error vector through `n` exact Schwarz steps by
/// solving the two homogeneous subdomain problems directly.
pub fn simulate_error_recursion(cfg: &SchwarzConfig1D, e0: [f64; 4], n: usize) -> Result<Vec<[f64; 4]>, TheoryError> {
    let l = cfg.length;
    let mut seq = Vec::with_capacity(n + 1);
    seq.push(e0);
    let mut e = e0;
    for _ in 0..n {
        // e1 takes e2's values at a1 + L and b1; e2 takes e1's at a2 and b2 - L
        let (alpha1, beta1) = (e[3], e[2]);
        let (alpha2, beta2) = (e[1], e[0]);
        let next = [
            analytic_error_solve(cfg.c, cfg.a1, cfg.b1, alpha1, beta1, cfg.b2 - l)?,
            analytic_error_solve(cfg.c, cfg.a1, cfg.b1, alpha1, beta1, cfg.a2)?,
            analytic_error_solve(cfg.c, cfg.a2, cfg.b2, alpha2, beta2, cfg.b1)?,
            analytic_error_solve(cfg.c, cfg.a2, cfg.b2, alpha2, beta2, cfg.a1 + l)?,
        ];
        seq.push(next);
        e = next;
    }
    Ok(seq)
}

/// One row of a theory sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub length: f64,
    pub l1: f64,
    pub l2: f64,
    pub d1: f64,
    pub d2: f64,
    pub inf_norm: f64,
    pub rho: f64,
    pub kappa_bound: f64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 9] = ["c", "L", "l1", "l2", "d1", "d2", "inf_norm", "rho", "kappa_bound"];

    pub fn evaluate(cfg: &SchwarzConfig1D) -> Result<Self, TheoryError> {
        let m = iteration_matrix(cfg)?;
        let inf_norm = m.inf_norm();
        Ok(Self {
            c: cfg.c,
            length: cfg.length,
            l1: cfg.l1(),
            l2: cfg.l2(),
            d1: cfg.delta1(),
            d2: cfg.delta2(),
            inf_norm,
            rho: m.spectral_radius(),
            kappa_bound: inf_norm * inf_norm,
        })
    }

    pub fn values(&self) -> [f64; 9] {
        [self.c, self.length, self.l1, self.l2, self.d1, self.d2, self.inf_norm, self.rho, self.kappa_bound]
    }
}

/// Sweeps a common overlap `d1 = d2` over `overlaps` for a fixed split.
pub fn overlap_sweep(c: f64, length: f64, f1: f64, overlaps: &[f64]) -> Result<Vec<SweepRow>, TheoryError> {
    overlaps
        .iter()
        .map(|&d| SweepRow::evaluate(&SchwarzConfig1D::from_split(c, length, f1, d, d)?))
        .collect()
}
