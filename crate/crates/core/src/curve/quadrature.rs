//! Adaptive Gauss-Kronrod (G7/K15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate on `[a, b]` and the |K15 - G7| error estimate.
pub(crate) fn gauss_kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        // odd Kronrod abscissae are the Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive integration to a relative error target.
///
/// Returns `None` if the interval cap is reached first.
pub(crate) fn integrate_adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    initial_pieces: usize,
    max_pieces: usize,
) -> Option<f64> {
    let mut pieces: Vec<(f64, f64, f64, f64)> = (0..initial_pieces)
        .map(|k| {
            let lo = a + (b - a) * k as f64 / initial_pieces as f64;
            let hi = a + (b - a) * (k + 1) as f64 / initial_pieces as f64;
            let (v, e) = gauss_kronrod15(f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() {
            return Some(total);
        }
        if pieces.len() >= max_pieces {
            return None;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod15(f, lo, mid);
        let (v2, e2) = gauss_kronrod15(f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}
