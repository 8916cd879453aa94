//! Gauss–Legendre rules and integration against `dA_α` on the unit disk.

use num_complex::Complex64;

use crate::scalars::WeightParameter;
use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes found by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Tensor rule for `∫_D f dA_α` with `dA_α = (α+1)(1-|u|²)^α dA`, `dA` the
/// normalized area measure.
///
/// Radially the rule is Gauss–Legendre in `t = |u|²`. For `α < 0` the
/// endpoint singularity is removed first by `v = (1-t)^{α+1}`, under which
/// `(α+1)(1-t)^α dt = dv`. Angularly it is the trapezoid rule.
#[derive(Debug, Clone)]
pub struct DiskRule {
    alpha: WeightParameter,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    angular: usize,
}

pub const DEFAULT_RADIAL_NODES: usize = 128;
pub const DEFAULT_ANGULAR_NODES: usize = 256;

impl DiskRule {
    pub fn new(alpha: WeightParameter, radial: usize, angular: usize) -> Result<Self> {
        let a = alpha.require_above_minus_one("integration against dA_alpha")?.value();
        if radial == 0 || angular == 0 {
            return Err(Error::InvalidArgument("quadrature needs nodes".into()));
        }
        let gl = GaussLegendre::new(radial);
        let (radii, radial_weights) = if a >= 0.0 {
            gl.nodes
                .iter()
                .zip(&gl.weights)
                .map(|(&t, &w)| (t.sqrt(), w * (a + 1.0) * (1.0 - t).powf(a)))
                .unzip()
        } else {
            gl.nodes
                .iter()
                .zip(&gl.weights)
                .map(|(&v, &w)| ((1.0 - v.powf(1.0 / (a + 1.0))).max(0.0).sqrt(), w))
                .unzip()
        };
        Ok(DiskRule {
            alpha,
            radii,
            radial_weights,
            angular,
        })
    }

    pub fn with_defaults(alpha: WeightParameter) -> Result<Self> {
        Self::new(alpha, DEFAULT_RADIAL_NODES, DEFAULT_ANGULAR_NODES)
    }

    pub fn alpha(&self) -> WeightParameter {
        self.alpha
    }

    /// Quadrature points and their weights (weights sum to 1).
    pub fn points(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let m = self.angular;
        self.radii.iter().zip(&self.radial_weights).flat_map(move |(&r, &w)| {
            (0..m).map(move |k| {
                let theta = std::f64::consts::TAU * (k as f64 + 0.5) / m as f64;
                (Complex64::from_polar(r, theta), w / m as f64)
            })
        })
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.points().map(|(u, w)| f(u) * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        assert!((gl.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..16 {
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((gl.integrate(|x| x.powi(k)) - exact).abs() < 1e-14, "x^{k}");
        }
        let gl = GaussLegendre::new(128);
        assert!((gl.integrate(|x| x.exp()) - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn disk_moments_match_basis_weights() {
        // ∫ |u|^{2n} dA_α = 1 / w_n
        for a in [-0.5, 0.0, 1.0, 2.3] {
            let alpha = WeightParameter::new(a).unwrap();
            let rule = DiskRule::new(alpha, 64, 16).unwrap();
            let w = crate::scalars::basis_weights(alpha, 10);
            for n in 0..=10 {
                let got = rule.integrate(|u| Complex64::new(u.norm_sqr().powi(n as i32), 0.0));
                assert!((got.re - 1.0 / w.get(n)).abs() < 1e-10, "alpha={a} n={n}: {got}");
            }
        }
    }

    #[test]
    fn rejects_infinite_measure() {
        let alpha = WeightParameter::new(-1.0).unwrap();
        assert!(DiskRule::with_defaults(alpha).is_err());
    }
}
