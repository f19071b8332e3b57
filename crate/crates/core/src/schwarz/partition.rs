use super::SchwarzError;
use crate::band::Band;
use crate::sparsela::CsrMatrix;
use crate::theory::{SchwarzConfig1D, TheoryError};

/// Whether `s` lies in `[a, b]` read modulo `length`.
pub fn in_periodic_interval(s: f64, a: f64, b: f64, length: f64) -> bool {
    (s - a).rem_euclid(length) <= b - a
}

/// Arclength partition of a band into two overlapping subdomains.
#[derive(Debug, Clone)]
pub struct Partition {
    pub length: f64,
    /// Disjoint intervals `[a~_j, b~_j)`.
    pub disjoint: [(f64, f64); 2],
    /// Overlapping intervals `[a_j, b_j]`, read modulo `length`.
    pub overlapping: [(f64, f64); 2],
    /// Ordinals whose closest point lies in the disjoint interval.
    pub owned: [Vec<usize>; 2],
    /// Ordinals whose closest point lies in the overlapping interval.
    pub members: [Vec<usize>; 2],
    /// Members whose operator row references a non-member.
    pub boundary: [Vec<usize>; 2],
    /// Members that are not boundary points.
    pub interior: [Vec<usize>; 2],
}

impl Partition {
    pub fn point_count(&self) -> usize {
        self.owned[0].len() + self.owned[1].len()
    }

    pub fn overlaps(&self) -> (f64, f64) {
        let [(a1, b1), (a2, b2)] = self.overlapping;
        (b1 - a2, b2 - (a1 + self.length))
    }

    /// The matching periodic interval problem with reaction coefficient `c`.
    pub fn config_1d(&self, c: f64) -> Result<SchwarzConfig1D, TheoryError> {
        let [(a1, b1), (a2, b2)] = self.overlapping;
        SchwarzConfig1D::new(c, self.length, a1, b1, a2, b2)
    }

    /// Subdomain owning each ordinal.
    pub fn owner_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.point_count()];
        for &g in &self.owned[1] {
            owner[g] = 1;
        }
        owner
    }
}

/// Splits `[0, L)` into `[0, f_1 L)` and `[f_1 L, L)`, then widens each shared
/// end by half of its overlap on both sides so that `b_1 - a_2 = overlaps[0]`
/// and `b_2 - (a_1 + L) = overlaps[1]`.
pub fn make_partition(
    band: &Band,
    matrix: &CsrMatrix,
    fractions: [f64; 2],
    overlaps: [f64; 2],
) -> Result<Partition, SchwarzError> {
    let length = band.curve_length();
    let n = band.len();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(SchwarzError::LengthMismatch { expected: n, got: matrix.nrows() });
    }
    if !fractions.iter().all(|&f| f > 0.0) || (fractions[0] + fractions[1] - 1.0).abs() > 1e-12 {
        return Err(SchwarzError::InvalidSplit(format!(
            "fractions {fractions:?} must be positive and sum to 1"
        )));
    }
    let cfg = SchwarzConfig1D::from_split(1.0, length, fractions[0], overlaps[0], overlaps[1]).map_err(|e| match e {
        TheoryError::InvalidOverlap { d1, d2, min_len } => SchwarzError::InvalidOverlap { d1, d2, min_len },
        other => SchwarzError::InvalidSplit(other.to_string()),
    })?;
    let cut = fractions[0] * length;
    let overlapping = [(cfg.a1, cfg.b1), (cfg.a2, cfg.b2)];

    let mut owned: [Vec<usize>; 2] = Default::default();
    let mut members: [Vec<usize>; 2] = Default::default();
    let mut is_member = [vec![false; n], vec![false; n]];
    for (g, &s) in band.inner_arclengths().iter().enumerate() {
        let s = s.rem_euclid(length);
        owned[usize::from(s >= cut)].push(g);
        for j in 0..2 {
            let (a, b) = overlapping[j];
            if in_periodic_interval(s, a, b, length) {
                members[j].push(g);
                is_member[j][g] = true;
            }
        }
    }

    let mut boundary: [Vec<usize>; 2] = Default::default();
    let mut interior: [Vec<usize>; 2] = Default::default();
    for j in 0..2 {
        for &g in &members[j] {
            if matrix.row(g).0.iter().any(|&c| !is_member[j][c]) {
                boundary[j].push(g);
            } else {
                interior[j].push(g);
            }
        }
        if interior[j].is_empty() {
            return Err(SchwarzError::EmptySubdomain(j));
        }
    }
    Ok(Partition {
        length,
        disjoint: [(0.0, cut), (cut, length)],
        overlapping,
        owned,
        members,
        boundary,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::discretize;
    use crate::curve::Curve;

    #[test]
    fn periodic_interval_membership() {
        assert!(in_periodic_interval(0.1, -0.5, 1.0, 10.0));
        assert!(in_periodic_interval(9.8, -0.5, 1.0, 10.0));
        assert!(!in_periodic_interval(5.0, -0.5, 1.0, 10.0));
        assert!(in_periodic_interval(0.2, 9.0, 10.5, 10.0));
    }

    #[test]
    fn one_to_two_split_intervals() {
        let curve = Curve::unit_circle();
        let (band, op) = discretize(&curve, 0.05, 2, 1.0).unwrap();
        let l = curve.length();
        let part = make_partition(&band, &op.matrix, [1.0 / 3.0, 2.0 / 3.0], [0.1 * l, 0.1 * l]).unwrap();
        let [(a1, b1), (a2, b2)] = part.overlapping;
        assert!((a1 + 0.05 * l).abs() < 1e-12 && (b1 - (l / 3.0 + 0.05 * l)).abs() < 1e-12);
        assert!((a2 - (l / 3.0 - 0.05 * l)).abs() < 1e-12 && (b2 - 1.05 * l).abs() < 1e-12);
        let (d1, d2) = part.overlaps();
        assert!((d1 - 0.1 * l).abs() < 1e-12 && (d2 - 0.1 * l).abs() < 1e-12);

        // owned sets partition the band, members cover it, boundary within members
        let mut seen = vec![0u8; band.len()];
        for j in 0..2 {
            for &g in &part.owned[j] {
                seen[g] += 1;
            }
            assert!(part.boundary[j].iter().all(|g| part.members[j].binary_search(g).is_ok()));
            assert_eq!(part.boundary[j].len() + part.interior[j].len(), part.members[j].len());
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!((0..band.len()).all(|g| part.members.iter().any(|m| m.binary_search(&g).is_ok())));
    }

    #[test]
    fn invalid_overlaps_and_splits() {
        let curve = Curve::unit_circle();
        let (band, op) = discretize(&curve, 0.1, 2, 1.0).unwrap();
        assert!(matches!(
            make_partition(&band, &op.matrix, [0.5, 0.5], [0.0, 0.0]),
            Err(SchwarzError::InvalidOverlap { .. })
        ));
        assert!(matches!(
            make_partition(&band, &op.matrix, [0.5, 0.5], [4.0, 4.0]),
            Err(SchwarzError::InvalidOverlap { .. })
        ));
        assert!(matches!(
            make_partition(&band, &op.matrix, [0.6, 0.6], [0.1, 0.1]),
            Err(SchwarzError::InvalidSplit(_))
        ));
    }
}
