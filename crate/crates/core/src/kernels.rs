//! Reproducing kernels of `A²_α`, `H^α(φ)` and `H^α(φ̄)`, and normalized
//! kernels `k_a`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operators::{DefectBand, DefectSide};
use crate::quadrature::DiskRule;
use crate::scalars::{basis_weights, WeightParameter};
use crate::symbols::{MobiusSpec, PowerSeriesSymbol};
use crate::{DiskPoint, Error, Result};

/// Starting truncation of the coefficient-space `K^{α,φ̄}`.
pub const CONJ_SUB_START: usize = 200;
/// Truncation levels tried by doubling: 200, 400, .., 6400.
pub const CONJ_SUB_LEVELS: usize = 6;
/// Relative change between consecutive levels accepted as converged.
pub const CONJ_SUB_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Bergman,
    Sub,
    ConjSub,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Bergman => "bergman",
            KernelKind::Sub => "sub",
            KernelKind::ConjSub => "conj_sub",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bergman" => Ok(KernelKind::Bergman),
            "sub" => Ok(KernelKind::Sub),
            "conj_sub" | "conj-sub" => Ok(KernelKind::ConjSub),
            _ => Err(Error::Parse(format!(
                "unknown kernel kind '{s}' (expected bergman, sub or conj_sub)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub alpha: WeightParameter,
    pub symbol: Option<PowerSeriesSymbol>,
}

impl KernelSpec {
    pub fn bergman(alpha: WeightParameter) -> Self {
        KernelSpec {
            kind: KernelKind::Bergman,
            alpha,
            symbol: None,
        }
    }

    pub fn sub(alpha: WeightParameter, symbol: PowerSeriesSymbol) -> Self {
        KernelSpec {
            kind: KernelKind::Sub,
            alpha,
            symbol: Some(symbol),
        }
    }

    pub fn conj_sub(alpha: WeightParameter, symbol: PowerSeriesSymbol) -> Self {
        KernelSpec {
            kind: KernelKind::ConjSub,
            alpha,
            symbol: Some(symbol),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Bergman => Ok(()),
            KernelKind::Sub => self.symbol.as_ref().map(|_| ()).ok_or(Error::MissingSymbol("sub")),
            KernelKind::ConjSub => {
                self.alpha.require_above_minus_one("conj_sub kernel")?;
                self.symbol
                    .as_ref()
                    .map(|_| ())
                    .ok_or(Error::MissingSymbol("conj_sub"))
            }
        }
    }
}

/// `(1 - z w̄)^{-(2+α)}` on the principal branch.
pub fn bergman(alpha: WeightParameter, z: Complex64, w: Complex64) -> Complex64 {
    (1.0 - z * w.conj()).powf(-alpha.kernel_exponent())
}

/// `(1 - φ(z) conj φ(w)) K_α(z, w)` from the truncated series of `φ`.
pub fn sub(symbol: &PowerSeriesSymbol, alpha: WeightParameter, z: Complex64, w: Complex64) -> Complex64 {
    (1.0 - symbol.eval_at(z) * symbol.eval_at(w).conj()) * bergman(alpha, z, w)
}

/// Evaluates a kernel once. For many evaluations of `conj_sub` use
/// [`KernelEvaluator`], which caches the defect matrices.
pub fn eval_kernel(spec: &KernelSpec, z: DiskPoint, w: DiskPoint) -> Result<Complex64> {
    KernelEvaluator::new(spec.clone())?.eval(z, w)
}

/// A validated kernel with caches for repeated evaluation.
#[derive(Debug)]
pub struct KernelEvaluator {
    spec: KernelSpec,
    conj: Option<ConjSubKernel>,
}

impl KernelEvaluator {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        spec.validate()?;
        let conj = match (spec.kind, &spec.symbol) {
            (KernelKind::ConjSub, Some(s)) => Some(ConjSubKernel::new(s.clone(), spec.alpha)?),
            _ => None,
        };
        Ok(KernelEvaluator { spec, conj })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn eval(&self, z: DiskPoint, w: DiskPoint) -> Result<Complex64> {
        let (zv, wv) = (z.value(), w.value());
        match (&self.spec.kind, &self.spec.symbol, &self.conj) {
            (KernelKind::Bergman, _, _) => Ok(bergman(self.spec.alpha, zv, wv)),
            (KernelKind::Sub, Some(s), _) => Ok(sub(s, self.spec.alpha, zv, wv)),
            (KernelKind::ConjSub, _, Some(c)) => c.eval(zv, wv),
            _ => unreachable!("validated in new"),
        }
    }

    /// Gram matrix `[K(z_i, z_j)]`, Hermitian by construction.
    pub fn gram(&self, points: &[DiskPoint]) -> Result<crate::linalg::CMatrix> {
        let n = points.len();
        let mut g = crate::linalg::CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(points[i], points[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
            g[(i, i)].im = 0.0;
        }
        Ok(g)
    }
}

/// Coefficient-space `K^{α,φ̄}(z, w) = Σ_{m,n} [I - T*T]_{mn} e_m(z) conj(e_n(w))`
/// with truncation doubled from 200 until consecutive values agree.
#[derive(Debug)]
pub struct ConjSubKernel {
    symbol: PowerSeriesSymbol,
    alpha: WeightParameter,
    levels: Vec<OnceLock<(DefectBand, Vec<f64>)>>,
}

impl ConjSubKernel {
    pub fn new(symbol: PowerSeriesSymbol, alpha: WeightParameter) -> Result<Self> {
        alpha.require_above_minus_one("conj_sub kernel")?;
        Ok(ConjSubKernel {
            symbol,
            alpha,
            levels: (0..CONJ_SUB_LEVELS).map(|_| OnceLock::new()).collect(),
        })
    }

    fn level(&self, k: usize) -> Result<&(DefectBand, Vec<f64>)> {
        if let Some(v) = self.levels[k].get() {
            return Ok(v);
        }
        let n = CONJ_SUB_START << k;
        let band = DefectBand::build(&self.symbol, self.alpha, n, DefectSide::Conj, self.symbol.len())?;
        let sqrt_w = basis_weights(self.alpha, n - 1).sqrt_values();
        Ok(self.levels[k].get_or_init(|| (band, sqrt_w)))
    }

    /// Value at truncation level `k` (size `200·2^k`).
    pub fn eval_at_level(&self, z: Complex64, w: Complex64, k: usize) -> Result<Complex64> {
        let (band, s) = self.level(k)?;
        let basis = |x: Complex64| {
            let mut pow = Complex64::new(1.0, 0.0);
            s.iter()
                .map(|&sm| {
                    let v = pow * sm;
                    pow *= x;
                    v
                })
                .collect::<Vec<_>>()
        };
        Ok(band.bilinear(&basis(z), &basis(w)))
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let mut prev = self.eval_at_level(z, w, 0)?;
        for k in 1..CONJ_SUB_LEVELS {
            let next = self.eval_at_level(z, w, k)?;
            if (next - prev).norm() < CONJ_SUB_TOL * next.norm().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::NoConvergence(format!(
            "conj_sub kernel at z = {z}, w = {w} did not settle by truncation {}",
            CONJ_SUB_START << (CONJ_SUB_LEVELS - 1)
        )))
    }
}

/// `∫ (1 - |φ(u)|²) (1 - z ū)^{-(2+α)} (1 - u w̄)^{-(2+α)} dA_α(u)` by quadrature.
pub fn conj_sub_quadrature(
    symbol: &PowerSeriesSymbol,
    rule: &DiskRule,
    z: Complex64,
    w: Complex64,
) -> Complex64 {
    let s = rule.alpha().kernel_exponent();
    rule.integrate(|u| {
        let defect = 1.0 - symbol.eval_at(u).norm_sqr();
        defect * (1.0 - z * u.conj()).powf(-s) * (1.0 - u * w.conj()).powf(-s)
    })
}

/// `k_a(z) = (1 - |a|²)^{(2+α)/2} / (1 - z ā)^{2+α}`, the unit-norm kernel at `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedKernelPoint {
    pub a: DiskPoint,
    pub alpha: WeightParameter,
}

impl NormalizedKernelPoint {
    pub fn new(a: DiskPoint, alpha: WeightParameter) -> Self {
        NormalizedKernelPoint { a, alpha }
    }

    pub fn eval(&self, z: DiskPoint) -> Complex64 {
        let s = self.alpha.kernel_exponent();
        let scale = (1.0 - self.a.value().norm_sqr()).powf(s / 2.0);
        scale * (1.0 - z.value() * self.a.conj()).powf(-s)
    }

    /// First `n` coefficients in the orthonormal basis `e_m`.
    pub fn coefficients(&self, n: usize) -> Vec<Complex64> {
        crate::operators::normalized_kernel_coefficients(self.alpha, self.a, n)
            .iter()
            .copied()
            .collect()
    }
}

pub fn eval_normalized(point: &NormalizedKernelPoint, z: DiskPoint) -> Complex64 {
    point.eval(z)
}

/// `max |K^{α,ψ}(z,w) - g(z) conj(g(w)) K^{α,φ}(z,w)|` over all point pairs,
/// with `ψ`, `g` from [`PowerSeriesSymbol::normalize`].
pub fn rescaling_check(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    points: &[DiskPoint],
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("rescaling check needs at least two points".into()));
    }
    if symbol.is_constant() {
        return Err(Error::InvalidArgument("rescaling check needs a non-constant symbol".into()));
    }
    let norm = symbol.normalize()?;
    let mut worst = 0.0_f64;
    for &z in points {
        for &w in points {
            let (zv, wv) = (z.value(), w.value());
            let lhs = sub(&norm.psi, alpha, zv, wv);
            let rhs = norm.g_at(zv) * norm.g_at(wv).conj() * sub(symbol, alpha, zv, wv);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Residual of `K^{α,φ}(z,w) = (1-|a|²)/((1-āz)(1-a w̄)) · (1 - z w̄)^{-(1+α)}`
/// for the Möbius map `φ = ζ(a - z)/(1 - āz)`, both sides in closed form.
pub fn mobius_factorization_check(
    a: DiskPoint,
    zeta: Complex64,
    alpha: WeightParameter,
    points: &[DiskPoint],
) -> Result<f64> {
    let phi = MobiusSpec::new(a, zeta)?;
    let av = a.value();
    let mut worst = 0.0_f64;
    for &z in points {
        for &w in points {
            let (zv, wv) = (z.value(), w.value());
            let lhs = (1.0 - phi.eval(zv) * phi.eval(wv).conj()) * bergman(alpha, zv, wv);
            let rhs = (1.0 - av.norm_sqr()) / ((1.0 - av.conj() * zv) * (1.0 - av * wv.conj()))
                * (1.0 - zv * wv.conj()).powf(-(1.0 + alpha.value()));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::symbols::SymbolSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alpha(a: f64) -> WeightParameter {
        WeightParameter::new(a).unwrap()
    }

    fn series(text: &str) -> PowerSeriesSymbol {
        text.parse::<SymbolSpec>().unwrap().default_series().unwrap()
    }

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    fn random_points(seed: u64, n: usize, rmax: f64) -> Vec<DiskPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| DiskPoint::from_polar(rmax * rng.random::<f64>().sqrt(), rng.random::<f64>() * std::f64::consts::TAU).unwrap())
            .collect()
    }

    #[test]
    fn bergman_examples() {
        let k = eval_kernel(&KernelSpec::bergman(alpha(0.0)), pt(0.5, 0.0), pt(0.5, 0.0)).unwrap();
        assert!((k.re - 16.0 / 9.0).abs() < 1e-12 && k.im == 0.0);
        for a in [-1.7, -1.0, 0.0, 2.5] {
            let k = eval_kernel(&KernelSpec::bergman(alpha(a)), DiskPoint::ORIGIN, pt(0.3, -0.8)).unwrap();
            assert_eq!(k, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn bergman_matches_weighted_series() {
        // Σ w_n (z w̄)^n
        let a = alpha(-0.6);
        let (z, w) = (Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.5));
        let weights = basis_weights(a, 400);
        let x = z * w.conj();
        let mut pow = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for &wn in weights.values() {
            sum += pow * wn;
            pow *= x;
        }
        assert!((sum - bergman(a, z, w)).norm() < 1e-13);
    }

    #[test]
    fn sub_kernel_examples() {
        let s = series("blaschke zeros=0,0.4i");
        let spec = KernelSpec::sub(alpha(0.3), s);
        for z in random_points(1, 5, 0.9) {
            let k = eval_kernel(&spec, z, DiskPoint::ORIGIN).unwrap();
            assert!((k - 1.0).norm() < 1e-12);
        }
        let missing = KernelSpec {
            kind: KernelKind::Sub,
            alpha: alpha(0.0),
            symbol: None,
        };
        assert!(matches!(eval_kernel(&missing, DiskPoint::ORIGIN, DiskPoint::ORIGIN), Err(Error::MissingSymbol(_))));
        let low = KernelSpec::conj_sub(alpha(-1.0), series("series 0,1"));
        assert!(matches!(
            eval_kernel(&low, DiskPoint::ORIGIN, DiskPoint::ORIGIN),
            Err(Error::AlphaNotAboveMinusOne { .. })
        ));
    }

    #[test]
    fn kernels_are_hermitian_and_positive() {
        let s = series("blaschke zeros=0.5,-0.3+0.2i");
        for spec in [
            KernelSpec::bergman(alpha(-1.5)),
            KernelSpec::sub(alpha(0.4), s.clone()),
            KernelSpec::conj_sub(alpha(0.4), s.clone()),
        ] {
            let ev = KernelEvaluator::new(spec.clone()).unwrap();
            let points = random_points(11, 20, 0.9);
            for &z in &points[..5] {
                for &w in &points[5..10] {
                    let a = ev.eval(z, w).unwrap();
                    let b = ev.eval(w, z).unwrap();
                    assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0), "{:?}", spec.kind);
                }
                let d = ev.eval(z, z).unwrap();
                assert!(d.im.abs() < 1e-12 * d.norm().max(1.0) && d.re >= 0.0);
            }
            let g = ev.gram(&points).unwrap();
            let trace: f64 = (0..20).map(|i| g[(i, i)].re).sum();
            let min = linalg::hermitian_eigenvalues(&g)[0];
            assert!(min >= -1e-9 * trace, "{:?}: {min}", spec.kind);
        }
    }

    #[test]
    fn conj_sub_coefficient_form_matches_quadrature() {
        let s = series("blaschke zeros=0.5,-0.3+0.2i");
        let pairs = [
            (pt(0.0, 0.0), pt(0.0, 0.0)),
            (pt(0.7, 0.0), pt(0.0, 0.7)),
            (pt(0.3, -0.4), pt(-0.5, 0.2)),
            (pt(-0.49, -0.49), pt(-0.49, -0.49)),
        ];
        for a in [-0.5, 0.0, 1.0] {
            let a = alpha(a);
            let coeff = ConjSubKernel::new(s.clone(), a).unwrap();
            let rule = DiskRule::with_defaults(a).unwrap();
            for (z, w) in pairs {
                let x = coeff.eval(z.value(), w.value()).unwrap();
                let q = conj_sub_quadrature(&s, &rule, z.value(), w.value());
                assert!((x - q).norm() < 1e-6, "alpha {a}: {x} vs {q}");
            }
        }
    }

    #[test]
    fn conj_sub_of_the_identity_is_the_diagonal_kernel() {
        // E = diag(1/(n+2)) at alpha = 0, so K(z, w) = Σ (n+1)/(n+2) (z w̄)^n
        let coeff = ConjSubKernel::new(series("series 0,1"), alpha(0.0)).unwrap();
        let (z, w) = (Complex64::new(0.6, 0.1), Complex64::new(0.2, -0.5));
        let x = z * w.conj();
        let want: Complex64 = (0..400).map(|n| x.powu(n) * ((n as f64 + 1.0) / (n as f64 + 2.0))).sum();
        assert!((coeff.eval(z, w).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn normalized_kernel_examples() {
        let p = NormalizedKernelPoint::new(DiskPoint::ORIGIN, alpha(0.7));
        assert_eq!(eval_normalized(&p, pt(0.4, 0.4)), Complex64::new(1.0, 0.0));
        let p = NormalizedKernelPoint::new(pt(0.6, 0.0), alpha(0.0));
        assert!((eval_normalized(&p, pt(0.6, 0.0)).re - 1.5625).abs() < 1e-12);
        for a in [-1.5, 0.0, 2.0] {
            let p = NormalizedKernelPoint::new(pt(0.3, -0.5), alpha(a));
            let coeffs = p.coefficients(800);
            let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-10, "alpha {a}: {norm}");
            let expect = (1.0 - 0.34f64).powf(-(2.0 + a) / 2.0);
            assert!((p.eval(p.a).re - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn rescaling_examples() {
        let points = random_points(3, 10, 0.95);
        let r = rescaling_check(&series("series 0,1"), alpha(0.0), &points).unwrap();
        assert!(r < 1e-12);
        let r = rescaling_check(&series("mobius a=0.5"), alpha(0.0), &points).unwrap();
        assert!(r < 1e-9, "{r}");
        let r = rescaling_check(&series("blaschke zeros=0.3,-0.4"), alpha(-0.5), &points).unwrap();
        assert!(r < 1e-8, "{r}");
        assert!(rescaling_check(&series("series 0,1"), alpha(0.0), &points[..1]).is_err());
        assert!(rescaling_check(&series("series 0.5"), alpha(0.0), &points).is_err());
    }

    #[test]
    fn mobius_factorization_examples() {
        let points = random_points(4, 10, 0.95);
        let one = Complex64::new(1.0, 0.0);
        assert!(mobius_factorization_check(DiskPoint::ORIGIN, one, alpha(-0.3), &points).unwrap() < 1e-12);
        assert!(mobius_factorization_check(pt(0.5, 0.0), one, alpha(0.0), &points).unwrap() < 1e-10);
        let r = mobius_factorization_check(pt(0.0, 0.3), Complex64::new(0.6, 0.8), alpha(-0.5), &points).unwrap();
        assert!(r < 1e-10);
    }
}
