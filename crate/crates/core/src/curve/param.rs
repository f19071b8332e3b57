//! Closed parametric curves `t -> gamma(t)`, `t in [0, T)`.

/// A smooth closed parametrization in R^d.
///
/// Only `position` is required; derivatives default to central differences.
pub trait Parametrization: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    /// Parameter period `T`.
    fn period(&self) -> f64;

    fn position(&self, t: f64, out: &mut [f64]);

    fn velocity(&self, t: f64, out: &mut [f64]) {
        let e = 1e-6 * self.period();
        let d = self.dim();
        let (mut p, mut m) = (vec![0.0; d], vec![0.0; d]);
        self.position(t + e, &mut p);
        self.position(t - e, &mut m);
        for k in 0..d {
            out[k] = (p[k] - m[k]) / (2.0 * e);
        }
    }

    fn acceleration(&self, t: f64, out: &mut [f64]) {
        let e = 1e-4 * self.period();
        let d = self.dim();
        let (mut p, mut c, mut m) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        self.position(t + e, &mut p);
        self.position(t, &mut c);
        self.position(t - e, &mut m);
        for k in 0..d {
            out[k] = (p[k] - 2.0 * c[k] + m[k]) / (e * e);
        }
    }
}

/// Circle of radius `radius` in the plane, `t in [0, 2 pi)`.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub radius: f64,
}

impl Parametrization for Circle {
    fn dim(&self) -> usize {
        2
    }

    fn period(&self) -> f64 {
        std::f64::consts::TAU
    }

    fn position(&self, t: f64, out: &mut [f64]) {
        out[0] = self.radius * t.cos();
        out[1] = self.radius * t.sin();
    }

    fn velocity(&self, t: f64, out: &mut [f64]) {
        out[0] = -self.radius * t.sin();
        out[1] = self.radius * t.cos();
    }

    fn acceleration(&self, t: f64, out: &mut [f64]) {
        out[0] = -self.radius * t.cos();
        out[1] = -self.radius * t.sin();
    }
}

/// Boundary of a Moebius strip of the given width around a center circle:
///
/// `gamma(t) = ((R + (w/2) cos(t/2)) cos t, (R + (w/2) cos(t/2)) sin t, (w/2) sin(t/2))`,
/// `t in [0, 4 pi)`. The single boundary curve winds twice around the center circle.
#[derive(Debug, Clone, Copy)]
pub struct MobiusBoundary {
    pub width: f64,
    pub center_radius: f64,
}

impl MobiusBoundary {
    fn rho(&self, t: f64) -> (f64, f64, f64) {
        let hw = 0.5 * self.width;
        let (s, c) = (0.5 * t).sin_cos();
        (self.center_radius + hw * c, -0.5 * hw * s, -0.25 * hw * c)
    }
}

impl Parametrization for MobiusBoundary {
    fn dim(&self) -> usize {
        3
    }

    fn period(&self) -> f64 {
        4.0 * std::f64::consts::PI
    }

    fn position(&self, t: f64, out: &mut [f64]) {
        let (rho, _, _) = self.rho(t);
        let (s, c) = t.sin_cos();
        out[0] = rho * c;
        out[1] = rho * s;
        out[2] = 0.5 * self.width * (0.5 * t).sin();
    }

    fn velocity(&self, t: f64, out: &mut [f64]) {
        let (rho, drho, _) = self.rho(t);
        let (s, c) = t.sin_cos();
        out[0] = drho * c - rho * s;
        out[1] = drho * s + rho * c;
        out[2] = 0.25 * self.width * (0.5 * t).cos();
    }

    fn acceleration(&self, t: f64, out: &mut [f64]) {
        let (rho, drho, ddrho) = self.rho(t);
        let (s, c) = t.sin_cos();
        out[0] = ddrho * c - 2.0 * drho * s - rho * c;
        out[1] = ddrho * s + 2.0 * drho * c - rho * s;
        out[2] = -0.125 * self.width * (0.5 * t).sin();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(p: &dyn Parametrization) {
        let d = p.dim();
        let e = 1e-5;
        for k in 0..17 {
            let t = p.period() * k as f64 / 17.0 + 0.1;
            let (mut v, mut a, mut xp, mut xm, mut vp, mut vm) =
                (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
            p.velocity(t, &mut v);
            p.acceleration(t, &mut a);
            p.position(t + e, &mut xp);
            p.position(t - e, &mut xm);
            p.velocity(t + e, &mut vp);
            p.velocity(t - e, &mut vm);
            for i in 0..d {
                assert!((v[i] - (xp[i] - xm[i]) / (2.0 * e)).abs() < 1e-8);
                assert!((a[i] - (vp[i] - vm[i]) / (2.0 * e)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        check_derivatives(&Circle { radius: 1.7 });
        check_derivatives(&MobiusBoundary { width: 1.0, center_radius: 1.0 });
    }

    #[test]
    fn default_derivatives_are_consistent() {
        #[derive(Debug)]
        struct Ellipse;
        impl Parametrization for Ellipse {
            fn dim(&self) -> usize {
                2
            }
            fn period(&self) -> f64 {
                std::f64::consts::TAU
            }
            fn position(&self, t: f64, out: &mut [f64]) {
                out[0] = 2.0 * t.cos();
                out[1] = t.sin();
            }
        }
        let mut v = [0.0; 2];
        let mut a = [0.0; 2];
        Ellipse.velocity(0.4, &mut v);
        Ellipse.acceleration(0.4, &mut a);
        assert!((v[0] + 2.0 * 0.4f64.sin()).abs() < 1e-8);
        assert!((a[1] + 0.4f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn mobius_boundary_closes_after_two_turns() {
        let m = MobiusBoundary { width: 1.0, center_radius: 1.0 };
        let (mut a, mut b) = ([0.0; 3], [0.0; 3]);
        m.position(0.0, &mut a);
        m.position(m.period(), &mut b);
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
        // half way round the strands are on opposite edges
        m.position(std::f64::consts::TAU, &mut b);
        assert!((a[0] - 1.5).abs() < 1e-12 && (b[0] - 0.5).abs() < 1e-12);
    }
}
