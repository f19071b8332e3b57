//! Closed curves in R^d with arclength, curvature-radius and closest-point
//! queries.

mod param;
mod quadrature;

pub use param::{Circle, MobiusBoundary, Parametrization};

use quadrature::{gauss_kronrod15, integrate_adaptive};
use std::sync::Arc;
use thiserror::Error;

/// Uniform parameter samples used to bracket the global closest point.
pub const COARSE_SAMPLES: usize = 1 << 12;
/// Parameter nodes in the arclength table.
pub const ARCLENGTH_NODES: usize = 1 << 14;
/// Relative accuracy demanded of the total length.
pub const LENGTH_REL_TOL: f64 = 1e-10;
/// Two minimizers closer than this in distance are treated as a tie.
pub const UNIQUENESS_GAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("unknown curve {0:?}")]
    UnknownCurve(String),
    #[error("degenerate parametrization: {0}")]
    DegenerateParametrization(String),
    #[error("zero-speed point at t = {t}")]
    ZeroSpeed { t: f64 },
    #[error("curve does not close: gap {gap:e} at the end of the period")]
    NotClosed { gap: f64 },
    #[error("closest point is not unique: parameters {t1} and {t2} are both at distance {distance}")]
    NonUniqueClosestPoint { t1: f64, t2: f64, distance: f64 },
    #[error("point has dimension {got}, curve lives in R^{expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Result of a closest-point query.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosestPoint {
    pub point: Vec<f64>,
    /// Parameter `t*` in `[0, T)`.
    pub param: f64,
    /// Arclength `s(t*)` in `[0, L)`.
    pub arclength: f64,
    pub distance: f64,
    /// The query lies at or beyond the curvature-radius bound, where the
    /// closest point need not be unique.
    pub beyond_reach: bool,
}

/// Total arclength `int_0^T |gamma'(t)| dt` by adaptive Gauss-Kronrod quadrature.
pub fn length(param: &dyn Parametrization) -> Result<f64, CurveError> {
    let d = param.dim();
    let speed = |t: f64| {
        let mut v = vec![0.0; d];
        param.velocity(t, &mut v);
        norm(&v)
    };
    let l = integrate_adaptive(&speed, 0.0, param.period(), 0.01 * LENGTH_REL_TOL, 16, 1 << 14)
        .ok_or_else(|| CurveError::DegenerateParametrization("length quadrature did not converge".into()))?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(CurveError::DegenerateParametrization(format!("non-positive length {l}")));
    }
    Ok(l)
}

/// Minimum radius of curvature over `samples` uniform parameter values, with
/// derivatives from central differences of step `1e-6 T` on the position.
pub fn min_curvature_radius(param: &dyn Parametrization, samples: usize) -> Result<f64, CurveError> {
    let d = param.dim();
    let period = param.period();
    let e = 1e-6 * period;
    let (mut p, mut c, mut m) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut min_radius = f64::INFINITY;
    for k in 0..samples {
        let t = period * k as f64 / samples as f64;
        param.position(t + e, &mut p);
        param.position(t, &mut c);
        param.position(t - e, &mut m);
        let v: Vec<f64> = (0..d).map(|i| (p[i] - m[i]) / (2.0 * e)).collect();
        let a: Vec<f64> = (0..d).map(|i| (p[i] - 2.0 * c[i] + m[i]) / (e * e)).collect();
        let speed = norm(&v);
        if speed < 1e-12 {
            return Err(CurveError::ZeroSpeed { t });
        }
        let kappa = curvature(&v, &a);
        if kappa > 0.0 {
            min_radius = min_radius.min(1.0 / kappa);
        }
    }
    Ok(min_radius)
}

/// Curvature of a space curve from velocity and acceleration in any dimension:
/// `sqrt(|v|^2 |a|^2 - (v.a)^2) / |v|^3`.
fn curvature(v: &[f64], a: &[f64]) -> f64 {
    let vv = dot(v, v);
    let aa = dot(a, a);
    let va = dot(v, a);
    (vv * aa - va * va).max(0.0).sqrt() / vv.powf(1.5)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// An immutable closed curve with precomputed arclength and sampling data.
///
/// Cloning is cheap; the parametrization is shared.
#[derive(Debug, Clone)]
pub struct Curve {
    name: String,
    param: Arc<dyn Parametrization>,
    length: f64,
    min_radius: f64,
    /// Arclength at `t_k = k T / ARCLENGTH_NODES`, `k = 0..=ARCLENGTH_NODES`.
    table_s: Vec<f64>,
    /// Speed `|gamma'(t_k)|` at the same nodes.
    table_speed: Vec<f64>,
    /// Flattened positions at `COARSE_SAMPLES` uniform parameters.
    coarse: Vec<f64>,
    max_speed: f64,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
}

impl Curve {
    pub fn new(name: impl Into<String>, param: Arc<dyn Parametrization>) -> Result<Self, CurveError> {
        let d = param.dim();
        let period = param.period();
        if d < 2 || !(period > 0.0) {
            return Err(CurveError::DegenerateParametrization(format!("dimension {d}, period {period}")));
        }

        let (mut a, mut b) = (vec![0.0; d], vec![0.0; d]);
        param.position(0.0, &mut a);
        param.position(period - 1e-8 * period, &mut b);
        let gap = norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());

        let coarse_dt = period / COARSE_SAMPLES as f64;
        let mut coarse = vec![0.0; COARSE_SAMPLES * d];
        for (k, chunk) in coarse.chunks_exact_mut(d).enumerate() {
            param.position(k as f64 * coarse_dt, chunk);
        }
        let mut bbox_lo = vec![f64::INFINITY; d];
        let mut bbox_hi = vec![f64::NEG_INFINITY; d];
        for chunk in coarse.chunks_exact(d) {
            for k in 0..d {
                bbox_lo[k] = bbox_lo[k].min(chunk[k]);
                bbox_hi[k] = bbox_hi[k].max(chunk[k]);
            }
        }
        let diameter = norm(&bbox_lo.iter().zip(&bbox_hi).map(|(l, h)| h - l).collect::<Vec<_>>());
        if gap > 1e-6 * diameter {
            return Err(CurveError::NotClosed { gap });
        }

        let length = length(param.as_ref())?;

        let dt = period / ARCLENGTH_NODES as f64;
        let speed = |t: f64| {
            let mut v = vec![0.0; d];
            param.velocity(t, &mut v);
            norm(&v)
        };
        let mut table_s = Vec::with_capacity(ARCLENGTH_NODES + 1);
        let mut table_speed = Vec::with_capacity(ARCLENGTH_NODES + 1);
        let mut acc = 0.0;
        table_s.push(0.0);
        for k in 0..ARCLENGTH_NODES {
            let t0 = k as f64 * dt;
            acc += gauss_kronrod15(&speed, t0, t0 + dt).0;
            table_s.push(acc);
            let v = speed(t0);
            if v < 1e-12 {
                return Err(CurveError::ZeroSpeed { t: t0 });
            }
            table_speed.push(v);
        }
        table_speed.push(table_speed[0]);
        // the composite table and the adaptive total agree far below 1e-10 L
        if ((acc - length) / length).abs() > LENGTH_REL_TOL {
            return Err(CurveError::DegenerateParametrization(format!(
                "arclength table total {acc} disagrees with length {length}"
            )));
        }
        table_s[ARCLENGTH_NODES] = length;
        if table_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CurveError::DegenerateParametrization("arclength not strictly increasing".into()));
        }
        let max_speed = table_speed.iter().fold(0.0f64, |m, &v| m.max(v));

        let min_radius = min_curvature_radius(param.as_ref(), ARCLENGTH_NODES)?;
        if !(min_radius > 0.0) {
            return Err(CurveError::DegenerateParametrization("non-positive curvature radius".into()));
        }
        let pad = max_speed * coarse_dt;
        bbox_lo.iter_mut().for_each(|v| *v -= pad);
        bbox_hi.iter_mut().for_each(|v| *v += pad);

        Ok(Self {
            name: name.into(),
            param,
            length,
            min_radius,
            table_s,
            table_speed,
            coarse,
            max_speed,
            bbox_lo,
            bbox_hi,
        })
    }

    pub fn circle(radius: f64) -> Result<Self, CurveError> {
        if !(radius > 0.0) {
            return Err(CurveError::DegenerateParametrization(format!("circle radius {radius}")));
        }
        let name = if radius == 1.0 { "circle".to_string() } else { format!("circle:R={radius}") };
        Self::new(name, Arc::new(Circle { radius }))
    }

    pub fn unit_circle() -> Self {
        Self::circle(1.0).expect("unit circle is valid")
    }

    /// Boundary of the width-1 Moebius strip whose center circle has radius 1.
    pub fn mobius_boundary() -> Self {
        Self::new("mobius-boundary", Arc::new(MobiusBoundary { width: 1.0, center_radius: 1.0 }))
            .expect("mobius boundary is valid")
    }

    /// Looks up a built-in curve: `circle`, `circle:R=<r>` or `mobius-boundary`.
    pub fn from_name(name: &str) -> Result<Self, CurveError> {
        let name = name.trim();
        match name {
            "circle" => Ok(Self::unit_circle()),
            "mobius-boundary" | "mobius" => Ok(Self::mobius_boundary()),
            _ => {
                let radius = name
                    .strip_prefix("circle:R=")
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| CurveError::UnknownCurve(name.to_string()))?;
                Self::circle(radius)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.param.dim()
    }

    pub fn period(&self) -> f64 {
        self.param.period()
    }

    /// Total arclength `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Lower bound `R0` on the radii of curvature.
    pub fn min_curvature_radius(&self) -> f64 {
        self.min_radius
    }

    /// Axis-aligned box containing the curve.
    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    pub fn parametrization(&self) -> &dyn Parametrization {
        self.param.as_ref()
    }

    pub fn position(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.param.position(t, &mut out);
        out
    }

    fn speed(&self, t: f64) -> f64 {
        let mut v = vec![0.0; self.dim()];
        self.param.velocity(t, &mut v);
        norm(&v)
    }

    fn wrap_param(&self, t: f64) -> f64 {
        let t = t.rem_euclid(self.period());
        if t >= self.period() {
            0.0
        } else {
            t
        }
    }

    /// Arclength `s(t)` measured from `t = 0`, for `t` taken modulo `T`.
    pub fn arclength_at(&self, t: f64) -> f64 {
        let t = self.wrap_param(t);
        let dt = self.period() / ARCLENGTH_NODES as f64;
        let k = ((t / dt) as usize).min(ARCLENGTH_NODES - 1);
        let t0 = k as f64 * dt;
        if t == t0 {
            return self.table_s[k];
        }
        let partial = gauss_kronrod15(&|u| self.speed(u), t0, t).0;
        self.table_s[k] + partial
    }

    /// Parameter `t` with `s(t) = s` (s taken modulo `L`).
    pub fn param_at_arclength(&self, s: f64) -> f64 {
        let l = self.length;
        let mut s = s.rem_euclid(l);
        if s >= l {
            s = 0.0;
        }
        let k = match self.table_s.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(k) => return k as f64 * self.period() / ARCLENGTH_NODES as f64 % self.period(),
            Err(k) => k - 1,
        };
        let dt = self.period() / ARCLENGTH_NODES as f64;
        let (s0, s1) = (self.table_s[k], self.table_s[k + 1]);
        let ds = s1 - s0;
        let u = (s - s0) / ds;
        // cubic Hermite for t(s) with slopes dt/ds = 1/|gamma'|
        let (m0, m1) = (ds / self.table_speed[k], ds / self.table_speed[k + 1]);
        let (h10, h01, h11) = (
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        let t0 = k as f64 * dt;
        let mut t = t0 + h10 * m0 + h01 * dt + h11 * m1;
        t = t.clamp(t0, t0 + dt);
        for _ in 0..3 {
            let err = self.table_s[k] + gauss_kronrod15(&|v| self.speed(v), t0, t).0 - s;
            if err.abs() <= 1e-15 * l {
                break;
            }
            t = (t - err / self.speed(t)).clamp(t0, t0 + dt);
        }
        self.wrap_param(t)
    }

    /// Point `gamma(t(s))` at arclength `s` (modulo `L`).
    pub fn point_at_arclength(&self, s: f64) -> Vec<f64> {
        self.position(self.param_at_arclength(s))
    }

    /// Euclidean closest point on the curve.
    ///
    /// A global scan of the coarse samples brackets every candidate basin;
    /// each is refined by golden-section search and polished with Newton steps
    /// on the optimality residual `(gamma(t) - x) . gamma'(t)`.
    pub fn closest_point(&self, x: &[f64]) -> Result<ClosestPoint, CurveError> {
        let d = self.dim();
        if x.len() != d {
            return Err(CurveError::DimensionMismatch { expected: d, got: x.len() });
        }
        let n = COARSE_SAMPLES;
        let dist2: Vec<f64> = self
            .coarse
            .chunks_exact(d)
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        let best_coarse = dist2.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        let dt = self.period() / n as f64;
        let threshold = best_coarse + self.max_speed * dt;
        let threshold2 = threshold * threshold;
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&i| {
                let v = dist2[i];
                v <= threshold2 && v <= dist2[(i + n - 1) % n] && v <= dist2[(i + 1) % n]
            })
            .collect();
        candidates.sort_by(|&i, &j| dist2[i].total_cmp(&dist2[j]));
        candidates.truncate(8);

        let mut refined: Vec<(f64, f64)> = candidates
            .iter()
            .map(|&i| self.refine(x, (i as f64 - 1.0) * dt, (i as f64 + 1.0) * dt))
            .collect();
        refined.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (t_best, d_best) = refined[0];
        let p_best = self.position(t_best);
        for &(t, dist) in &refined[1..] {
            if dist - d_best < UNIQUENESS_GAP {
                let p = self.position(t);
                let sep = norm(&p.iter().zip(&p_best).map(|(a, b)| a - b).collect::<Vec<_>>());
                if sep > 1e-6 {
                    return Err(CurveError::NonUniqueClosestPoint { t1: t_best, t2: t, distance: d_best });
                }
            }
        }
        let param = self.wrap_param(t_best);
        Ok(ClosestPoint {
            arclength: self.arclength_at(param),
            point: p_best,
            param,
            distance: d_best,
            beyond_reach: d_best >= self.min_radius,
        })
    }

    /// Local minimization of `|x - gamma(t)|` on `[lo, hi]`; returns `(t, distance)`.
    fn refine(&self, x: &[f64], mut lo: f64, mut hi: f64) -> (f64, f64) {
        let d = self.dim();
        let mut p = vec![0.0; d];
        let f = |t: f64, p: &mut [f64]| {
            self.param.position(t, p);
            p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        };
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let bracket = lo..=hi;
        // distance^2 is flat to roundoff within ~sqrt(eps) of the minimum;
        // Newton on the first-order residual finishes the job
        let tol = 1e-6 * (hi - lo);
        let mut c = hi - INV_PHI * (hi - lo);
        let mut e = lo + INV_PHI * (hi - lo);
        let mut fc = f(c, &mut p);
        let mut fe = f(e, &mut p);
        while hi - lo > tol {
            if fc <= fe {
                hi = e;
                e = c;
                fe = fc;
                c = hi - INV_PHI * (hi - lo);
                fc = f(c, &mut p);
            } else {
                lo = c;
                c = e;
                fc = fe;
                e = lo + INV_PHI * (hi - lo);
                fe = f(e, &mut p);
            }
        }
        let mut t = 0.5 * (lo + hi);
        let mut v = vec![0.0; d];
        let mut a = vec![0.0; d];
        let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        // safeguarded Newton on g(t) = (gamma - x) . gamma'
        for _ in 0..4 {
            self.param.position(t, &mut p);
            self.param.velocity(t, &mut v);
            self.param.acceleration(t, &mut a);
            let diff: Vec<f64> = p.iter().zip(x).map(|(p, x)| p - x).collect();
            let g = dot(&diff, &v);
            if g.abs() <= 1e-13 * norm(&v) * scale {
                break;
            }
            let dg = dot(&v, &v) + dot(&diff, &a);
            if !(dg > 0.0) {
                break;
            }
            let next = t - g / dg;
            if !bracket.contains(&next) {
                break;
            }
            t = next;
        }
        self.param.position(t, &mut p);
        let dist = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        (t, dist)
    }

    /// Optimality residual `|(x - gamma(t)) . gamma'(t)|` at parameter `t`.
    pub fn optimality_residual(&self, x: &[f64], t: f64) -> f64 {
        let d = self.dim();
        let (mut p, mut v) = (vec![0.0; d], vec![0.0; d]);
        self.param.position(t, &mut p);
        self.param.velocity(t, &mut v);
        x.iter().zip(&p).zip(&v).map(|((x, p), v)| (x - p) * v).sum::<f64>().abs()
    }

    /// Largest speed `|gamma'|` over the table nodes.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn circle_lengths() {
        for r in [0.5, 1.0, 2.0] {
            let c = Curve::circle(r).unwrap();
            assert!((c.length() - TAU * r).abs() / (TAU * r) <= 1e-10, "R = {r}");
            assert!((c.min_curvature_radius() - r).abs() < 1e-4 * r);
        }
    }

    #[test]
    fn arclength_table_endpoints() {
        let c = Curve::mobius_boundary();
        assert_eq!(c.arclength_at(0.0), 0.0);
        assert!((c.arclength_at(c.period() - 1e-12) - c.length()).abs() < 1e-9);
    }

    #[test]
    fn closest_point_on_unit_circle() {
        let c = Curve::unit_circle();
        let cp = c.closest_point(&[2.0, 0.0]).unwrap();
        assert!((cp.point[0] - 1.0).abs() < 1e-12 && cp.point[1].abs() < 1e-12);
        assert!(cp.arclength.abs() < 1e-12 || (cp.arclength - TAU).abs() < 1e-12);
        assert!(cp.beyond_reach);
        let cp = c.closest_point(&[0.3, 0.4]).unwrap();
        assert!((cp.point[0] - 0.6).abs() < 1e-12 && (cp.point[1] - 0.8).abs() < 1e-12);
        assert!(!cp.beyond_reach);
        assert!((cp.distance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn center_of_circle_is_not_unique() {
        let c = Curve::unit_circle();
        assert!(matches!(c.closest_point(&[0.0, 0.0]), Err(CurveError::NonUniqueClosestPoint { .. })));
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let c = Curve::unit_circle();
        assert!(matches!(c.closest_point(&[0.0, 0.0, 1.0]), Err(CurveError::DimensionMismatch { .. })));
    }

    #[test]
    fn point_at_arclength_on_circle() {
        let c = Curve::unit_circle();
        let p = c.point_at_arclength(0.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        let p = c.point_at_arclength(PI);
        assert!((p[0] + 1.0).abs() < 1e-10 && p[1].abs() < 1e-10);
        let p = c.point_at_arclength(-PI / 2.0);
        assert!(p[0].abs() < 1e-10 && (p[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn names_resolve() {
        assert_eq!(Curve::from_name("circle").unwrap().name(), "circle");
        let c = Curve::from_name("circle:R=2").unwrap();
        assert!((c.length() - 4.0 * PI).abs() < 1e-9);
        assert_eq!(Curve::from_name("mobius-boundary").unwrap().dim(), 3);
        assert!(matches!(Curve::from_name("torus"), Err(CurveError::UnknownCurve(_))));
        assert!(matches!(Curve::from_name("circle:R=abc"), Err(CurveError::UnknownCurve(_))));
    }

    #[test]
    fn open_curve_is_rejected() {
        #[derive(Debug)]
        struct Arc3;
        impl Parametrization for Arc3 {
            fn dim(&self) -> usize {
                2
            }
            fn period(&self) -> f64 {
                1.0
            }
            fn position(&self, t: f64, out: &mut [f64]) {
                out[0] = t;
                out[1] = t * t;
            }
        }
        assert!(matches!(Curve::new("arc", Arc::new(Arc3)), Err(CurveError::NotClosed { .. })));
    }

    #[test]
    fn stalled_parametrization_reports_zero_speed() {
        #[derive(Debug)]
        struct Stalled;
        impl Parametrization for Stalled {
            fn dim(&self) -> usize {
                2
            }
            fn period(&self) -> f64 {
                TAU
            }
            // parked at (1, 0) for t in [0, 1]
            fn position(&self, t: f64, out: &mut [f64]) {
                let u = (t - 1.0).max(0.0) * TAU / (TAU - 1.0);
                out[0] = u.cos();
                out[1] = u.sin();
            }
        }
        assert!(matches!(min_curvature_radius(&Stalled, 64), Err(CurveError::ZeroSpeed { .. })));
    }
}
