//! The computational tube around a curve and the closest point method
//! discretization assembled on it.
//!
//! A [`Band`] holds two kinds of grid points:
//!
//! * **inner** points, every grid node within the tube radius `r` of the curve
//!   (plus any node an interpolation stencil needs, should one fall outside).
//!   These carry the unknowns.
//! * **ghost** points, the Laplacian neighbours of inner points that are not
//!   inner themselves. They carry closest-point data so the extension can be
//!   evaluated there, but are not unknowns.
//!
//! With `E` the extension (all points -> inner data) and `Lap` the
//! finite-difference Laplacian (inner rows, all-point columns), the
//! discrete operator `c I - Lap E + (2d/h^2)(I - E)` is square on the inner points.

mod operators;
mod stencil;

pub use operators::{
    assemble_helmholtz, assemble_rhs, discretize, extension_matrix, laplacian, restrict_to_curve, DiscreteOperator,
};
pub use stencil::{equispaced_barycentric_weights, lagrange_basis, stencil_start, Stencil};

use crate::curve::{Curve, CurveError};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("invalid discretization parameters: {0}")]
    InvalidParameters(String),
    #[error("tube radius {radius} is not below the curvature-radius bound {reach}")]
    TubeTooWide { radius: f64, reach: f64 },
    #[error("band is empty")]
    EmptyBand,
    #[error("interpolation stencil node {index:?} is not an inner band point")]
    StencilOutsideBand { index: Vec<i64> },
    #[error("vector has length {got}, band has {expected} unknowns")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Sparse(#[from] crate::sparsela::SparseError),
}

/// Tube radius `sqrt((d-1)(p+1)^2 + (p+3)^2) h / 2` sufficient for degree-`p`
/// interpolation with the second-order Laplacian in R^d.
pub fn tube_radius(dim: usize, degree: usize, h: f64) -> f64 {
    let p = degree as f64;
    (((dim - 1) as f64) * (p + 1.0).powi(2) + (p + 3.0).powi(2)).sqrt() * h / 2.0
}

/// Encodes integer grid indices inside a fixed box as `u64` keys.
#[derive(Debug, Clone)]
struct GridKeys {
    lo: Vec<i64>,
    extent: Vec<u64>,
}

impl GridKeys {
    fn encode(&self, idx: &[i64]) -> Option<u64> {
        let mut key = 0u64;
        for ((&i, &lo), &n) in idx.iter().zip(&self.lo).zip(&self.extent) {
            let off = i - lo;
            if off < 0 || off as u64 >= n {
                return None;
            }
            key = key * n + off as u64;
        }
        Some(key)
    }

    fn decode(&self, mut key: u64, out: &mut [i64]) {
        for k in (0..self.lo.len()).rev() {
            out[k] = self.lo[k] + (key % self.extent[k]) as i64;
            key /= self.extent[k];
        }
    }
}

/// Grid points of the computational tube with their closest-point data.
#[derive(Debug, Clone)]
pub struct Band {
    dim: usize,
    h: f64,
    degree: usize,
    radius: f64,
    curve_length: f64,
    n_inner: usize,
    /// Grid indices, `dim` per point; inner points first, then ghosts.
    indices: Vec<i64>,
    cp: Vec<f64>,
    arclength: Vec<f64>,
    distance: Vec<f64>,
    keys: GridKeys,
    lookup: HashMap<u64, usize>,
    bary: Vec<f64>,
    grown: usize,
}

struct PointData {
    cp: Vec<f64>,
    arclength: f64,
    distance: f64,
}

/// Closest-point query for a band candidate. A tie between distant curve
/// points means the band reaches the medial axis, which the curvature bound
/// alone does not rule out for curves that nearly touch themselves.
fn query(curve: &Curve, keys: &GridKeys, key: u64, h: f64, radius: f64, idx: &mut [i64]) -> Result<PointData, BandError> {
    keys.decode(key, idx);
    let x: Vec<f64> = idx.iter().map(|&i| h * i as f64).collect();
    let cp = curve.closest_point(&x).map_err(|e| match e {
        CurveError::NonUniqueClosestPoint { distance, .. } => BandError::TubeTooWide { radius, reach: distance },
        other => other.into(),
    })?;
    Ok(PointData { cp: cp.point, arclength: cp.arclength, distance: cp.distance })
}

/// Builds the tube of radius [`tube_radius`] around `curve` on the grid `x = h i`.
pub fn build_band(curve: &Curve, h: f64, degree: usize) -> Result<Band, BandError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(BandError::InvalidParameters(format!("grid spacing h = {h}")));
    }
    if degree < 1 {
        return Err(BandError::InvalidParameters("interpolation degree must be >= 1".into()));
    }
    let d = curve.dim();
    let radius = tube_radius(d, degree, h);
    let reach = curve.min_curvature_radius();
    if radius >= reach {
        return Err(BandError::TubeTooWide { radius, reach });
    }

    let pad = radius + (degree as f64 + 2.0) * h;
    let (blo, bhi) = curve.bounding_box();
    let lo: Vec<i64> = blo.iter().map(|&v| ((v - pad) / h).floor() as i64 - 2).collect();
    let hi: Vec<i64> = bhi.iter().map(|&v| ((v + pad) / h).ceil() as i64 + 2).collect();
    let extent: Vec<u64> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as u64).collect();
    if extent.iter().try_fold(1u64, |acc, &e| acc.checked_mul(e)).is_none() {
        return Err(BandError::InvalidParameters(format!("grid spacing h = {h} too fine for key encoding")));
    }
    let keys = GridKeys { lo, extent };

    // Candidate nodes: everything within r + spacing of a dense set of curve
    // samples. Any node within r of the curve lies within r + spacing/2 of
    // some sample, so no node of the tube is missed.
    let samples = ((curve.length() / (0.5 * h)).ceil() as usize).max(64);
    let mut candidates: HashSet<u64> = HashSet::new();
    let mut spacing = 0.0f64;
    let mut prev = curve.position(0.0);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|k| curve.position(curve.period() * k as f64 / samples as f64))
        .collect();
    for p in points.iter().skip(1).chain(std::iter::once(&points[0])) {
        let gap = p.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        spacing = spacing.max(gap);
        prev = p.clone();
    }
    let reach_r = radius + spacing;
    let mut idx = vec![0i64; d];
    for c in &points {
        let lo: Vec<i64> = c.iter().map(|&v| ((v - reach_r) / h).ceil() as i64).collect();
        let hi: Vec<i64> = c.iter().map(|&v| ((v + reach_r) / h).floor() as i64).collect();
        let counts: Vec<i64> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0)).collect();
        let total: i64 = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut dist2 = 0.0;
            for k in (0..d).rev() {
                idx[k] = lo[k] + rem % counts[k];
                rem /= counts[k];
                let dx = h * idx[k] as f64 - c[k];
                dist2 += dx * dx;
            }
            if dist2 <= reach_r * reach_r {
                if let Some(key) = keys.encode(&idx) {
                    candidates.insert(key);
                }
            }
        }
    }

    let mut sorted: Vec<u64> = candidates.into_iter().collect();
    sorted.sort_unstable();
    let mut inner: HashMap<u64, PointData> = HashMap::new();
    for key in sorted {
        let data = query(curve, &keys, key, h, radius, &mut idx)?;
        if data.distance <= radius {
            inner.insert(key, data);
        }
    }
    if inner.is_empty() {
        return Err(BandError::EmptyBand);
    }

    // Close the band under stencil membership: every interpolation stencil of
    // an inner or ghost point must consist of inner points.
    let bary = equispaced_barycentric_weights(degree);
    let mut ghosts: HashMap<u64, PointData> = HashMap::new();
    let mut grown = 0usize;
    let mut nb = vec![0i64; d];
    loop {
        let mut missing: HashSet<u64> = HashSet::new();
        let mut new_ghosts: HashSet<u64> = HashSet::new();
        for (&key, data) in inner.iter() {
            let st = Stencil::new(&data.cp, h, degree, &bary);
            st.for_each_node(|node, _| {
                let k = keys.encode(node).expect("stencil inside key box");
                if !inner.contains_key(&k) {
                    missing.insert(k);
                }
            });
            keys.decode(key, &mut idx);
            for axis in 0..d {
                for step in [-1i64, 1] {
                    nb.copy_from_slice(&idx);
                    nb[axis] += step;
                    let k = keys.encode(&nb).expect("neighbour inside key box");
                    if !inner.contains_key(&k) && !ghosts.contains_key(&k) {
                        new_ghosts.insert(k);
                    }
                }
            }
        }
        let mut new_ghosts: Vec<u64> = new_ghosts.into_iter().collect();
        new_ghosts.sort_unstable();
        for key in new_ghosts {
            let data = query(curve, &keys, key, h, radius, &mut idx)?;
            ghosts.insert(key, data);
        }
        for data in ghosts.values() {
            Stencil::new(&data.cp, h, degree, &bary).for_each_node(|node, _| {
                let k = keys.encode(node).expect("stencil inside key box");
                if !inner.contains_key(&k) {
                    missing.insert(k);
                }
            });
        }
        if missing.is_empty() {
            break;
        }
        let mut missing: Vec<u64> = missing.into_iter().collect();
        missing.sort_unstable();
        grown += missing.len();
        for key in missing {
            let data = match ghosts.remove(&key) {
                Some(g) => g,
                None => query(curve, &keys, key, h, radius, &mut idx)?,
            };
            inner.insert(key, data);
        }
        ghosts.retain(|k, _| !inner.contains_key(k));
    }
    if grown > 0 {
        log::warn!("band grown by {grown} stencil nodes beyond the tube radius");
    }

    let mut inner_keys: Vec<u64> = inner.keys().copied().collect();
    inner_keys.sort_unstable();
    let mut ghost_keys: Vec<u64> = ghosts.keys().copied().collect();
    ghost_keys.sort_unstable();
    let n_inner = inner_keys.len();
    let total = n_inner + ghost_keys.len();
    let mut band = Band {
        dim: d,
        h,
        degree,
        radius,
        curve_length: curve.length(),
        n_inner,
        indices: vec![0; total * d],
        cp: Vec::with_capacity(total * d),
        arclength: Vec::with_capacity(total),
        distance: Vec::with_capacity(total),
        keys,
        lookup: HashMap::with_capacity(total),
        bary,
        grown,
    };
    for (ord, key) in inner_keys.into_iter().chain(ghost_keys).enumerate() {
        let data = inner.remove(&key).or_else(|| ghosts.remove(&key)).expect("key present");
        band.keys.decode(key, &mut band.indices[ord * d..(ord + 1) * d]);
        band.cp.extend_from_slice(&data.cp);
        band.arclength.push(data.arclength);
        band.distance.push(data.distance);
        band.lookup.insert(key, ord);
    }
    Ok(band)
}

impl Band {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn curve_length(&self) -> f64 {
        self.curve_length
    }

    /// Number of unknowns (inner points).
    pub fn len(&self) -> usize {
        self.n_inner
    }

    pub fn is_empty(&self) -> bool {
        self.n_inner == 0
    }

    pub fn ghost_count(&self) -> usize {
        self.arclength.len() - self.n_inner
    }

    /// Inner plus ghost points.
    pub fn total_points(&self) -> usize {
        self.arclength.len()
    }

    /// Stencil nodes added beyond the tube radius during closure.
    pub fn grown_points(&self) -> usize {
        self.grown
    }

    pub fn grid_index(&self, ord: usize) -> &[i64] {
        &self.indices[ord * self.dim..(ord + 1) * self.dim]
    }

    pub fn coordinates(&self, ord: usize) -> Vec<f64> {
        self.grid_index(ord).iter().map(|&i| self.h * i as f64).collect()
    }

    pub fn closest_point(&self, ord: usize) -> &[f64] {
        &self.cp[ord * self.dim..(ord + 1) * self.dim]
    }

    /// Arclength of the closest point of point `ord`.
    pub fn arclength(&self, ord: usize) -> f64 {
        self.arclength[ord]
    }

    /// Arclengths of the inner points' closest points.
    pub fn inner_arclengths(&self) -> &[f64] {
        &self.arclength[..self.n_inner]
    }

    pub fn distance(&self, ord: usize) -> f64 {
        self.distance[ord]
    }

    /// Ordinal of a grid index, inner or ghost.
    pub fn ordinal(&self, idx: &[i64]) -> Option<usize> {
        self.keys.encode(idx).and_then(|k| self.lookup.get(&k).copied())
    }

    /// Ordinal of a grid index that must be an inner point.
    pub fn inner_ordinal(&self, idx: &[i64]) -> Option<usize> {
        self.ordinal(idx).filter(|&o| o < self.n_inner)
    }

    pub fn stencil_at(&self, y: &[f64]) -> Stencil {
        Stencil::new(y, self.h, self.degree, &self.bary)
    }

    /// Whitespace-separated dump: `kind i_1..i_d x_1..x_d cp_1..cp_d s dist`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for ord in 0..self.total_points() {
            let kind = if ord < self.n_inner { "inner" } else { "ghost" };
            let _ = write!(out, "{kind}");
            for i in self.grid_index(ord) {
                let _ = write!(out, " {i}");
            }
            for x in self.coordinates(ord) {
                let _ = write!(out, " {x:.17e}");
            }
            for c in self.closest_point(ord) {
                let _ = write!(out, " {c:.17e}");
            }
            let _ = writeln!(out, " {:.17e} {:.17e}", self.arclength[ord], self.distance[ord]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tube_radius_values() {
        assert_eq!(tube_radius(2, 4, 0.0), 0.0);
        assert!((tube_radius(2, 4, 0.1) - 74f64.sqrt() / 2.0 * 0.1).abs() < 1e-15);
        assert!((tube_radius(2, 4, 0.1) - 0.430116).abs() < 1e-6);
        assert!((tube_radius(3, 4, 0.1) - 0.497494).abs() < 1e-6);
    }

    #[test]
    fn too_wide_tube_is_rejected() {
        let c = Curve::unit_circle();
        assert!(matches!(build_band(&c, 0.3, 4), Err(BandError::TubeTooWide { .. })));
        assert!(matches!(build_band(&c, 0.0, 4), Err(BandError::InvalidParameters(_))));
        assert!(matches!(build_band(&c, 0.1, 0), Err(BandError::InvalidParameters(_))));
    }

    #[test]
    fn band_reaching_across_mobius_strands_is_too_wide() {
        // the strands at t = pi and t = 3 pi are 1 apart, below the curvature radius
        let m = Curve::mobius_boundary();
        assert!(tube_radius(3, 2, 0.12) < m.min_curvature_radius());
        assert!(matches!(build_band(&m, 0.12, 2), Err(BandError::TubeTooWide { .. })));
    }

    #[test]
    fn keys_round_trip() {
        let keys = GridKeys { lo: vec![-5, -3, 2], extent: vec![11, 7, 4] };
        let mut out = [0i64; 3];
        for idx in [[-5, -3, 2], [5, 3, 5], [0, 0, 3]] {
            let k = keys.encode(&idx).unwrap();
            keys.decode(k, &mut out);
            assert_eq!(out, idx);
        }
        assert!(keys.encode(&[6, 0, 2]).is_none());
    }

    #[test]
    fn band_points_satisfy_radius_and_closure() {
        let c = Curve::unit_circle();
        let band = build_band(&c, 0.1, 2).unwrap();
        assert_eq!(band.grown_points(), 0);
        assert!(band.ghost_count() > 0);
        for ord in 0..band.len() {
            assert!(band.distance(ord) <= band.radius());
        }
        for ord in 0..band.total_points() {
            band.stencil_at(band.closest_point(ord)).for_each_node(|node, _| {
                assert!(band.inner_ordinal(node).is_some());
            });
        }
        for ord in 0..band.len() {
            let idx = band.grid_index(ord).to_vec();
            for axis in 0..2 {
                for step in [-1, 1] {
                    let mut nb = idx.clone();
                    nb[axis] += step;
                    assert!(band.ordinal(&nb).is_some());
                }
            }
        }
    }
}
