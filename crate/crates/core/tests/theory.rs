use cpm_schwarz::theory::{
    equal_sized_kappa, iteration_matrix, kappa_bound, reference_ras_1d, rho_squared, SchwarzConfig1D,
};
use proptest::prelude::*;

prop_compose! {
    fn valid_config()(
        log_c in -2.0..2.0f64,
        length in 1.0..20.0f64,
        f1 in 0.2..0.8f64,
        t1 in 0.01..0.98f64,
        share in 0.05..0.95f64,
    ) -> SchwarzConfig1D {
        // total overlap t1 * min(l1, l2) split between the two interfaces
        let short = f1.min(1.0 - f1) * length;
        let total = t1 * short;
        SchwarzConfig1D::from_split(10f64.powf(log_c), length, f1, share * total, (1.0 - share) * total).unwrap()
    }
}

fn power_iteration(m: &[[f64; 4]; 4]) -> f64 {
    // M^2 is block diagonal with nonnegative blocks; iterate on it to avoid period-2 oscillation
    let mut v = [1.0, 0.9, 0.8, 0.7];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let mut w = [0.0; 4];
        for i in 0..4 {
            for k in 0..4 {
                for j in 0..4 {
                    w[i] += m[i][k] * m[k][j] * v[j];
                }
            }
        }
        let norm = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        lambda = norm / v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        v = w.map(|x| x / norm);
    }
    lambda.sqrt()
}

proptest! {
    #[test]
    fn entries_and_row_sums_lie_in_unit_interval(cfg in valid_config()) {
        let m = iteration_matrix(&cfg).unwrap();
        for e in [m.first, m.second] {
            prop_assert!(e.p > 0.0 && e.p < 1.0 && e.r > 0.0 && e.r < 1.0);
            prop_assert!(e.q > 0.0 && e.q < 1.0 && e.s > 0.0 && e.s < 1.0);
            prop_assert!(e.p + e.r < 1.0 && e.q + e.s < 1.0);
        }
        let kappa = kappa_bound(&cfg).unwrap();
        prop_assert!(kappa > 0.0 && kappa < 1.0);
        prop_assert!(rho_squared(&cfg).unwrap() <= kappa * (1.0 + 1e-14));
    }

    #[test]
    fn spectral_radius_matches_power_iteration(cfg in valid_config()) {
        let m = iteration_matrix(&cfg).unwrap();
        let oracle = power_iteration(&m.to_array());
        prop_assert!((m.spectral_radius() - oracle).abs() <= 1e-8, "{} vs {}", m.spectral_radius(), oracle);
    }

    #[test]
    fn bound_decreases_with_overlap(log_c in -2.0..2.0f64, length in 1.0..20.0f64, a in 0.01..0.45f64, b in 0.01..0.45f64) {
        prop_assume!((a - b).abs() > 1e-3);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c = 10f64.powf(log_c);
        let k_lo = equal_sized_kappa(c, length, lo * length).unwrap();
        let k_hi = equal_sized_kappa(c, length, hi * length).unwrap();
        prop_assert!(k_hi < k_lo);
    }
}

#[test]
fn reference_iteration_contracts_at_the_bound_for_unequal_split() {
    let length = std::f64::consts::TAU;
    let cfg = SchwarzConfig1D::from_split(1.0, length, 1.0 / 3.0, 0.1 * length, 0.15 * length).unwrap();
    let run = reference_ras_1d(&cfg, |s| s.sin(), 1e-3 * length, None, 60).unwrap();
    let e = &run.error_history;
    let kappa = kappa_bound(&cfg).unwrap();
    // late-stage ratios sit between rho^2 and the infinity-norm bound
    let late = e[41] / e[39];
    assert!(late <= kappa * 1.02 && late >= rho_squared(&cfg).unwrap() * 0.98, "ratio {late}, bound {kappa}");
}
