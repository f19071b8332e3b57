use super::{build_band, Band, BandError};
use crate::curve::Curve;
use crate::sparsela::{CsrMatrix, RowBuilder};

/// Interpolation of inner-point data at the closest point of every band point.
///
/// Shape `total_points x len`: inner rows first, then ghost rows.
pub fn extension_matrix(band: &Band) -> Result<CsrMatrix, BandError> {
    let n = band.total_points();
    let per_row = (band.degree() + 1).pow(band.dim() as u32);
    let mut builder = RowBuilder::with_capacity(n, band.len(), n * per_row);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(per_row);
    for ord in 0..n {
        row.clear();
        let mut missing = None;
        band.stencil_at(band.closest_point(ord)).for_each_node(|node, w| match band.inner_ordinal(node) {
            Some(j) => row.push((j, w)),
            None => missing = Some(node.to_vec()),
        });
        if let Some(index) = missing {
            return Err(BandError::StencilOutsideBand { index });
        }
        builder.push_unsorted_row(&mut row);
    }
    Ok(builder.finish())
}

/// Second-order `2d + 1` point Laplacian, inner rows, all-point columns.
pub fn laplacian(band: &Band) -> Result<CsrMatrix, BandError> {
    let d = band.dim();
    let n = band.len();
    let inv_h2 = 1.0 / (band.h() * band.h());
    let mut builder = RowBuilder::with_capacity(n, band.total_points(), n * (2 * d + 1));
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * d + 1);
    let mut nb = vec![0i64; d];
    for ord in 0..n {
        row.clear();
        row.push((ord, -2.0 * d as f64 * inv_h2));
        for axis in 0..d {
            for step in [-1i64, 1] {
                nb.copy_from_slice(band.grid_index(ord));
                nb[axis] += step;
                let j = band.ordinal(&nb).ok_or_else(|| BandError::StencilOutsideBand { index: nb.clone() })?;
                row.push((j, inv_h2));
            }
        }
        builder.push_unsorted_row(&mut row);
    }
    Ok(builder.finish())
}

/// The assembled operators of a band.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    /// `c I - Lap E + (2d/h^2)(I - E_inner)`, square on the inner points.
    pub matrix: CsrMatrix,
    pub extension: CsrMatrix,
    pub laplacian: CsrMatrix,
    pub c: f64,
}

/// Closest point discretization of `-Delta_S u + c u` on the inner points.
pub fn assemble_helmholtz(band: &Band, c: f64) -> Result<DiscreteOperator, BandError> {
    if !c.is_finite() {
        return Err(BandError::InvalidParameters(format!("reaction coefficient c = {c}")));
    }
    let e = extension_matrix(band)?;
    let lap = laplacian(band)?;
    let n = band.len();
    let gamma = 2.0 * band.dim() as f64 / (band.h() * band.h());
    let lap_e = lap.spmm(&e)?;
    let e_inner = e.top_rows(n);
    let stab = CsrMatrix::identity(n).add_scaled(c + gamma, &e_inner, -gamma)?;
    let matrix = stab.add_scaled(1.0, &lap_e, -1.0)?;
    Ok(DiscreteOperator { matrix, extension: e, laplacian: lap, c })
}

/// Right-hand side `f(s(cp(x)))` on the inner points, `f` given as a function of arclength.
pub fn assemble_rhs(band: &Band, f: impl Fn(f64) -> f64) -> Vec<f64> {
    band.inner_arclengths().iter().map(|&s| f(s)).collect()
}

/// Builds the band and the operator in one step.
pub fn discretize(curve: &Curve, h: f64, degree: usize, c: f64) -> Result<(Band, DiscreteOperator), BandError> {
    let band = build_band(curve, h, degree)?;
    let op = assemble_helmholtz(&band, c)?;
    Ok((band, op))
}

/// Interpolates inner-point data `u` at the curve points with the given arclengths.
pub fn restrict_to_curve(band: &Band, curve: &Curve, u: &[f64], arclengths: &[f64]) -> Result<Vec<f64>, BandError> {
    if u.len() != band.len() {
        return Err(BandError::LengthMismatch { expected: band.len(), got: u.len() });
    }
    arclengths
        .iter()
        .map(|&s| {
            let y = curve.point_at_arclength(s);
            let mut acc = 0.0;
            let mut missing = None;
            band.stencil_at(&y).for_each_node(|node, w| match band.inner_ordinal(node) {
                Some(j) => acc += w * u[j],
                None => missing = Some(node.to_vec()),
            });
            match missing {
                Some(index) => Err(BandError::StencilOutsideBand { index }),
                None => Ok(acc),
            }
        })
        .collect()
}
