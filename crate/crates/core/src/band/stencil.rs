//! Tensor-product barycentric Lagrange stencils on the uniform grid `x = h i`.

/// Barycentric weights `(-1)^j C(p, j)` for `p + 1` equispaced nodes.
pub fn equispaced_barycentric_weights(degree: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(degree + 1);
    let mut binom = 1.0;
    for j in 0..=degree {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        w.push(sign * binom);
        binom = binom * (degree - j) as f64 / (j + 1) as f64;
    }
    w
}

/// Lagrange basis values at local coordinate `u` for nodes `0, 1, ..., p`.
pub fn lagrange_basis(bary: &[f64], u: f64, out: &mut [f64]) {
    if let Some(j) = (0..bary.len()).find(|&j| u == j as f64) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[j] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for (j, (o, &w)) in out.iter_mut().zip(bary).enumerate() {
        *o = w / (u - j as f64);
        denom += *o;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// First node of the `p + 1` node stencil along one axis for coordinate `y`.
///
/// The stencil is centered so `y` falls in one of its middle cells:
/// `floor(y/h - (p - 1)/2)`. For even `p` this picks the window whose
/// middle node is nearest to `y`; the tie `y/h = k + 1/2` goes to the upper window.
pub fn stencil_start(y: f64, h: f64, degree: usize) -> i64 {
    (y / h - 0.5 * (degree as f64 - 1.0)).floor() as i64
}

/// Degree-`p` tensor-product interpolation stencil around a point.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub base: Vec<i64>,
    /// Per-axis basis values, `weights[axis][j]` for node `base[axis] + j`.
    pub weights: Vec<Vec<f64>>,
}

impl Stencil {
    pub fn new(y: &[f64], h: f64, degree: usize, bary: &[f64]) -> Self {
        let mut base = Vec::with_capacity(y.len());
        let mut weights = Vec::with_capacity(y.len());
        for &yk in y {
            let b = stencil_start(yk, h, degree);
            let mut w = vec![0.0; degree + 1];
            lagrange_basis(bary, yk / h - b as f64, &mut w);
            base.push(b);
            weights.push(w);
        }
        Self { base, weights }
    }

    /// Visits every stencil node as (grid index, tensor weight).
    pub fn for_each_node(&self, mut visit: impl FnMut(&[i64], f64)) {
        let d = self.base.len();
        let n = self.weights[0].len();
        let total = n.pow(d as u32);
        let mut idx = vec![0i64; d];
        for flat in 0..total {
            let mut rem = flat;
            let mut w = 1.0;
            for k in (0..d).rev() {
                let j = rem % n;
                rem /= n;
                idx[k] = self.base[k] + j as i64;
                w *= self.weights[k][j];
            }
            visit(&idx, w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_weights_are_one_minus_theta_and_theta() {
        let bary = equispaced_barycentric_weights(1);
        let mut w = [0.0; 2];
        for theta in [0.0, 0.25, 0.5, 0.9] {
            lagrange_basis(&bary, theta, &mut w);
            assert!((w[0] - (1.0 - theta)).abs() < 1e-15 && (w[1] - theta).abs() < 1e-15);
        }
        // d = 1 analog through the stencil: cp at fraction 0.3 between nodes 2 and 3
        let s = Stencil::new(&[0.23], 0.1, 1, &bary);
        assert_eq!(s.base, vec![2]);
        assert!((s.weights[0][0] - 0.7).abs() < 1e-12 && (s.weights[0][1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn weights_reproduce_polynomials_up_to_degree() {
        for p in 1..=6 {
            let bary = equispaced_barycentric_weights(p);
            let mut w = vec![0.0; p + 1];
            let u = 0.5 * (p as f64 - 1.0) + 0.37;
            lagrange_basis(&bary, u, &mut w);
            for k in 0..=p {
                let interp: f64 = w.iter().enumerate().map(|(j, w)| w * (j as f64).powi(k as i32)).sum();
                assert!((interp - u.powi(k as i32)).abs() <= 1e-10 * u.powi(k as i32).max(1.0), "p={p} k={k}");
            }
        }
    }

    #[test]
    fn stencil_is_centered() {
        let h = 0.1;
        for p in 1..=5 {
            for y in [-0.731, -0.05, 0.0, 0.1234, 0.96] {
                let b = stencil_start(y, h, p);
                let u = y / h - b as f64;
                assert!(u >= 0.5 * (p as f64 - 1.0) - 1e-12 && u <= 0.5 * (p as f64 + 1.0) + 1e-12, "p={p} y={y}");
            }
        }
    }

    #[test]
    fn tensor_weights_sum_to_one() {
        let bary = equispaced_barycentric_weights(4);
        let s = Stencil::new(&[0.123, -0.456, 0.789], 0.05, 4, &bary);
        let mut total = 0.0;
        let mut count = 0;
        s.for_each_node(|_, w| {
            total += w;
            count += 1;
        });
        assert_eq!(count, 125);
        assert!((total - 1.0).abs() < 1e-13);
    }
}
