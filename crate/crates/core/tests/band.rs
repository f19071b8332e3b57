use cpm_schwarz::band::{build_band, discretize, extension_matrix, laplacian, restrict_to_curve, tube_radius, Band};
use cpm_schwarz::curve::Curve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid points of the unit circle's tube, enumerated over a bounding box.
fn brute_force_tube(h: f64, radius: f64) -> Vec<[i64; 2]> {
    let m = ((1.0 + radius) / h).ceil() as i64 + 1;
    let mut pts = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            let (x, y) = (i as f64 * h, j as f64 * h);
            if ((x * x + y * y).sqrt() - 1.0).abs() <= radius {
                pts.push([i, j]);
            }
        }
    }
    pts
}

#[test]
fn circle_band_matches_brute_force_enumeration() {
    let (h, p) = (0.1, 4);
    let band = build_band(&Curve::unit_circle(), h, p).unwrap();
    let expected = brute_force_tube(h, tube_radius(2, p, h));
    assert_eq!(band.len() - band.grown_points(), expected.len());
    for idx in &expected {
        assert!(band.inner_ordinal(idx).is_some(), "{idx:?} missing");
    }
}

#[test]
fn band_size_scales_inversely_with_h() {
    let curve = Curve::unit_circle();
    for h in [0.05, 0.02] {
        let coarse = build_band(&curve, h, 4).unwrap().len() as f64;
        let fine = build_band(&curve, h / 2.0, 4).unwrap().len() as f64;
        let ratio = fine / coarse;
        assert!((1.8..=2.2).contains(&ratio), "h = {h}: ratio {ratio}");
    }
}

/// Tensor Lagrange interpolation from explicit node products.
fn interpolate(band: &Band, v: &[f64], y: &[f64]) -> f64 {
    let (h, p) = (band.h(), band.degree());
    let starts: Vec<i64> = y.iter().map(|&yk| (yk / h - (p as f64 - 1.0) / 2.0).floor() as i64).collect();
    let basis: Vec<Vec<f64>> = y
        .iter()
        .zip(&starts)
        .map(|(&yk, &s)| {
            (0..=p)
                .map(|i| {
                    let xi = (s + i as i64) as f64 * h;
                    (0..=p).filter(|&j| j != i).map(|j| (yk - (s + j as i64) as f64 * h) / (xi - (s + j as i64) as f64 * h)).product()
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let n = (p + 1).pow(y.len() as u32);
    for flat in 0..n {
        let mut rem = flat;
        let mut idx = Vec::with_capacity(y.len());
        let mut w = 1.0;
        for k in 0..y.len() {
            let i = rem % (p + 1);
            rem /= p + 1;
            idx.push(starts[k] + i as i64);
            w *= basis[k][i];
        }
        let ord = band.inner_ordinal(&idx).expect("stencil node inside band");
        total += w * v[ord];
    }
    total
}

fn extension_and_laplacian_oracles(curve: Curve, h: f64, p: usize) {
    let c = 1.5;
    let (band, op) = discretize(&curve, h, p, c).unwrap();
    let d = band.dim() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = (0..band.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let ev: Vec<f64> = (0..band.total_points()).map(|g| interpolate(&band, &v, band.closest_point(g))).collect();
    let e = extension_matrix(&band).unwrap().matvec(&v).unwrap();
    let scale = 1.0 / (h * h);
    for g in 0..band.total_points() {
        assert!((e[g] - ev[g]).abs() <= 1e-12, "E row {g}");
    }

    let lap = laplacian(&band).unwrap().matvec(&ev).unwrap();
    let mut oracle_lap = vec![0.0; band.len()];
    for (i, out) in oracle_lap.iter_mut().enumerate() {
        let idx = band.grid_index(i).to_vec();
        let mut acc = -2.0 * d * ev[i];
        for k in 0..idx.len() {
            for step in [-1, 1] {
                let mut nb = idx.clone();
                nb[k] += step;
                acc += ev[band.ordinal(&nb).expect("neighbour stored")];
            }
        }
        *out = acc * scale;
        assert!((lap[i] - *out).abs() <= 1e-9 * scale, "Lap row {i}");
    }

    let av = op.matrix.matvec(&v).unwrap();
    let shift = 2.0 * d * scale;
    for i in 0..band.len() {
        let expected = (c + shift) * v[i] - shift * ev[i] - oracle_lap[i];
        assert!((av[i] - expected).abs() <= 1e-9 * scale, "A row {i}");
    }

    let ones = op.matrix.matvec(&vec![1.0; band.len()]).unwrap();
    assert!(ones.iter().all(|x| (x - c).abs() <= 1e-9 * scale));
}

#[test]
fn operators_match_oracles_on_circle() {
    extension_and_laplacian_oracles(Curve::unit_circle(), 0.1, 3);
}

#[test]
fn operators_match_oracles_on_mobius() {
    extension_and_laplacian_oracles(Curve::mobius_boundary(), 0.05, 2);
}

#[test]
fn restriction_recovers_smooth_function() {
    let curve = Curve::unit_circle();
    let band = build_band(&curve, 0.05, 4).unwrap();
    let u: Vec<f64> = band.inner_arclengths().iter().map(|s| s.sin()).collect();
    let s: Vec<f64> = (0..97).map(|k| 0.0654 * k as f64).collect();
    let r = restrict_to_curve(&band, &curve, &u, &s).unwrap();
    let err = r.iter().zip(&s).map(|(a, s)| (a - s.sin()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "restriction error {err:e}");
}
