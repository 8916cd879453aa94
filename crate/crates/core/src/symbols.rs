//! Analytic symbols `φ` in the closed unit ball of `H^∞`.
//!
//! Closed-form symbols (Möbius maps, finite Blaschke products, scaled
//! monomials, atomic singular inner functions) are converted into a
//! [`PowerSeriesSymbol`], the representation every operator and kernel
//! consumes. A series carries a bound on the ℓ² norm of its discarded tail,
//! which bounds the evaluation error at `|z| ≤ r` by
//! `tail_bound · r^{L+1} / (1 - r)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::point::format_complex;
use crate::scalars::{binomial_coeffs, WeightParameter};
use crate::{linalg, parse_complex, series, DiskPoint, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest series length any length policy will produce.
pub const MAX_SERIES_LENGTH: usize = 1 << 18;

/// Default truncation tolerance for closed-form symbols with geometric decay.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Default series length for singular inner functions.
pub const SINGULAR_DEFAULT_LENGTH: usize = 600;

/// Cap on the series length of a normalized polynomial symbol.
pub const MAX_NORMALIZED_LENGTH: usize = 4096;

fn unimodular(zeta: Complex64) -> Result<Complex64> {
    let m = zeta.norm();
    if !m.is_finite() || (m - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "zeta = {} is not unimodular",
            format_complex(zeta)
        )));
    }
    Ok(zeta / m)
}

/// `φ(z) = ζ (a - z) / (1 - ā z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusSpec {
    a: DiskPoint,
    zeta: Complex64,
}

impl MobiusSpec {
    pub fn new(a: DiskPoint, zeta: Complex64) -> Result<Self> {
        Ok(MobiusSpec {
            a,
            zeta: unimodular(zeta)?,
        })
    }

    /// The involution `φ_a(z) = (a - z)/(1 - ā z)` exchanging `0` and `a`.
    pub fn involution(a: DiskPoint) -> Self {
        MobiusSpec { a, zeta: ONE }
    }

    pub fn a(&self) -> DiskPoint {
        self.a
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let a = self.a.value();
        self.zeta * (a - z) / (1.0 - a.conj() * z)
    }

    fn coefficients(&self, len: usize) -> Vec<Complex64> {
        let a = self.a.value();
        let scale = self.zeta * (a.norm_sqr() - 1.0);
        let mut out = Vec::with_capacity(len);
        let mut pow = ONE;
        for k in 0..len {
            if k == 0 {
                out.push(self.zeta * a);
            } else {
                out.push(scale * pow);
                pow *= a.conj();
            }
        }
        out
    }

    /// Exact ℓ¹ mass of the coefficients with index `≥ len`.
    fn tail(&self, len: usize) -> f64 {
        let m = self.a.norm();
        match len {
            0 => 1.0 + 2.0 * m,
            _ if m == 0.0 => {
                if len >= 2 {
                    0.0
                } else {
                    1.0
                }
            }
            _ => (1.0 + m) * m.powi(len as i32 - 1),
        }
    }
}

/// `φ(z) = ζ Π_i (a_i - z)/(1 - ā_i z)`, zeros repeated by multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeSpec {
    zeros: Vec<DiskPoint>,
    zeta: Complex64,
}

impl BlaschkeSpec {
    pub fn new(zeros: Vec<DiskPoint>, zeta: Complex64) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::InvalidArgument(
                "a Blaschke product needs at least one zero".into(),
            ));
        }
        Ok(BlaschkeSpec {
            zeros,
            zeta: unimodular(zeta)?,
        })
    }

    pub fn zeros(&self) -> &[DiskPoint] {
        &self.zeros
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// The product of two Blaschke products; degrees add.
    pub fn product(&self, other: &BlaschkeSpec) -> BlaschkeSpec {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        BlaschkeSpec {
            zeros,
            zeta: self.zeta * other.zeta,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().fold(self.zeta, |acc, a| {
            let a = a.value();
            acc * (a - z) / (1.0 - a.conj() * z)
        })
    }

    fn coefficients(&self, len: usize) -> Vec<Complex64> {
        let mut acc = vec![ZERO; len];
        if len > 0 {
            acc[0] = self.zeta;
        }
        for &a in &self.zeros {
            let factor = MobiusSpec::involution(a).coefficients(len);
            acc = series::mul(&acc, &factor, len);
        }
        acc
    }

    /// Cauchy-estimate bound on the ℓ¹ mass of coefficients with index `≥ len`:
    /// on `|z| = R < 1/ρ` each factor is bounded by `(|a| + R)/(1 - |a| R)`.
    fn tail(&self, len: usize) -> f64 {
        let moduli: Vec<f64> = self.zeros.iter().map(|a| a.norm()).collect();
        let rho = moduli.iter().cloned().fold(0.0, f64::max);
        if rho == 0.0 {
            return if len > self.degree() { 0.0 } else { 1.0 };
        }
        let mut best = f64::INFINITY;
        for step in 1..20 {
            let t = step as f64 / 20.0;
            let r = 1.0 + t * (1.0 / rho - 1.0);
            let log_m: f64 = moduli
                .iter()
                .map(|&m| ((m + r) / (1.0 - m * r)).ln())
                .sum();
            let bound = (log_m - len as f64 * r.ln()).exp() / (1.0 - 1.0 / r);
            best = best.min(bound);
        }
        best
    }
}

/// `φ(z) = c z^n`. A missing scale means the complete Nevanlinna-Pick
/// example constant for the weight the symbol is later bound to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialSpec {
    n: u32,
    c: Option<Complex64>,
}

impl MonomialSpec {
    pub fn new(n: u32, c: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("monomial degree must be positive".into()));
        }
        if !(c.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "monomial scale |c| = {} exceeds 1",
                c.norm()
            )));
        }
        Ok(MonomialSpec { n, c: Some(c) })
    }

    /// Degree `n` with the scale left to [`MonomialSpec::cnp_example`].
    pub fn unscaled(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("monomial degree must be positive".into()));
        }
        Ok(MonomialSpec { n, c: None })
    }

    /// The monomial whose sub-Bergman kernel is CNP for `-2 < α < -1`:
    /// `c² = (2+α) Γ(n-2-α) / (n! Γ(-1-α))`, which is minus the `n`-th
    /// Taylor coefficient of `(1-x)^{2+α}`.
    pub fn cnp_example(n: u32, alpha: WeightParameter) -> Result<Self> {
        let a = alpha.value();
        if !(a < -1.0) {
            return Err(Error::InvalidArgument(format!(
                "the monomial CNP example needs -2 < alpha < -1, got {a}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("monomial degree must be positive".into()));
        }
        let b = binomial_coeffs(a + 2.0, n as usize)?;
        let c2 = -b.coeffs()[n as usize];
        Self::new(n, Complex64::new(c2.sqrt(), 0.0))
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn scale(&self) -> Option<Complex64> {
        self.c
    }

    fn scale_or_err(&self) -> Result<Complex64> {
        self.c.ok_or(Error::UnresolvedScale)
    }
}

/// `φ(z) = exp(c (z+1)/(z-1))`, `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularInnerSpec {
    c: f64,
}

impl SingularInnerSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "singular inner mass must be positive, got {c}"
            )));
        }
        Ok(SingularInnerSpec { c })
    }

    pub fn mass(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.c * (z + 1.0) / (z - 1.0)).exp()
    }

    /// Taylor coefficients from `(1-z)² φ' = -2c φ`:
    /// `(n+1) f_{n+1} = (2n - 2c) f_n - (n-1) f_{n-1}`.
    fn coefficients(&self, len: usize) -> Vec<f64> {
        let mut f = Vec::with_capacity(len);
        let c = self.c;
        for n in 0..len {
            let v = match n {
                0 => (-c).exp(),
                1 => -2.0 * c * f[0],
                _ => {
                    let m = (n - 1) as f64;
                    ((2.0 * m - 2.0 * c) * f[n - 1] - (m - 1.0) * f[n - 2]) / (m + 1.0)
                }
            };
            f.push(v);
        }
        f
    }
}

/// Any symbol the toolkit can expand into a power series.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Mobius(MobiusSpec),
    Blaschke(BlaschkeSpec),
    Monomial(MonomialSpec),
    SingularInner(SingularInnerSpec),
    /// Explicit Taylor coefficients (a polynomial symbol).
    Series(Vec<Complex64>),
}

impl SymbolSpec {
    /// `φ(z) = z`.
    pub fn identity() -> Self {
        SymbolSpec::Series(vec![ZERO, ONE])
    }

    /// Fixes the monomial CNP-example scale for the given weight; other
    /// symbols are returned unchanged.
    pub fn resolve(&self, alpha: WeightParameter) -> Result<SymbolSpec> {
        match self {
            SymbolSpec::Monomial(m) if m.c.is_none() => {
                Ok(SymbolSpec::Monomial(MonomialSpec::cnp_example(m.n, alpha)?))
            }
            other => Ok(other.clone()),
        }
    }

    /// Closed-form value, independent of any series truncation.
    pub fn eval_closed(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            SymbolSpec::Mobius(m) => m.eval(z),
            SymbolSpec::Blaschke(b) => b.eval(z),
            SymbolSpec::Monomial(m) => m.scale_or_err()? * z.powu(m.n),
            SymbolSpec::SingularInner(s) => s.eval(z),
            SymbolSpec::Series(c) => series::horner(c, z),
        })
    }

    /// The first `length` Taylor coefficients with a bound on the discarded tail.
    pub fn to_series(&self, length: usize) -> Result<PowerSeriesSymbol> {
        if length == 0 {
            return Err(Error::InvalidArgument("series length must be at least 1".into()));
        }
        let (coeffs, tail) = match self {
            SymbolSpec::Mobius(m) => (m.coefficients(length), m.tail(length)),
            SymbolSpec::Blaschke(b) => (b.coefficients(length), b.tail(length)),
            SymbolSpec::Monomial(m) => {
                let c = m.scale_or_err()?;
                let n = m.n as usize;
                let mut coeffs = vec![ZERO; length];
                if n < length {
                    coeffs[n] = c;
                    (coeffs, 0.0)
                } else {
                    (coeffs, c.norm())
                }
            }
            SymbolSpec::SingularInner(s) => {
                let f = s.coefficients(length);
                let mass: f64 = f.iter().map(|x| x * x).sum();
                // ‖φ‖_{H²} = 1 for inner φ; pad for rounding in the partial sum
                let tail = ((1.0 - mass).max(0.0) + length as f64 * f64::EPSILON).sqrt();
                (f.into_iter().map(|x| Complex64::new(x, 0.0)).collect(), tail)
            }
            SymbolSpec::Series(c) => {
                let mut coeffs: Vec<Complex64> = c.iter().copied().take(length).collect();
                coeffs.resize(length, ZERO);
                let tail = c.iter().skip(length).map(|x| x.norm()).sum();
                (coeffs, tail)
            }
        };
        PowerSeriesSymbol::new(coeffs, tail)
    }

    /// Shortest length whose tail bound is below `tol` (singular inner
    /// symbols use at least [`SINGULAR_DEFAULT_LENGTH`]).
    pub fn length_for_tolerance(&self, tol: f64) -> Result<usize> {
        Ok(match self {
            SymbolSpec::Mobius(m) => search_length(2, |l| m.tail(l) < tol),
            SymbolSpec::Blaschke(b) => search_length(b.degree() + 1, |l| b.tail(l) < tol),
            SymbolSpec::Monomial(m) => m.n as usize + 1,
            SymbolSpec::SingularInner(_) => SINGULAR_DEFAULT_LENGTH,
            SymbolSpec::Series(c) => c.len().max(1),
        })
    }

    /// Length such that evaluation anywhere on `|z| ≤ radius` is accurate to `tol`.
    pub fn length_for_radius(&self, radius: f64, tol: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&radius) {
            return Err(Error::InvalidArgument(format!("radius {radius} must lie in [0, 1)")));
        }
        let base = self.length_for_tolerance(tol)?;
        Ok(match self {
            SymbolSpec::SingularInner(_) => {
                // ℓ² tail ≤ 1, so r^{L} / (1 - r) ≤ tol suffices
                let need = ((tol * (1.0 - radius)).ln() / radius.ln()).ceil();
                base.max(need.min(MAX_SERIES_LENGTH as f64) as usize)
            }
            _ => base,
        })
    }

    /// Series with the default length policy.
    pub fn default_series(&self) -> Result<PowerSeriesSymbol> {
        self.to_series(self.length_for_tolerance(DEFAULT_TAIL_TOLERANCE)?)
    }

    /// Degree when the symbol is a finite Blaschke product (unimodular
    /// monomials and rotations included).
    pub fn blaschke_degree(&self) -> Option<usize> {
        match self {
            SymbolSpec::Mobius(_) => Some(1),
            SymbolSpec::Blaschke(b) => Some(b.degree()),
            SymbolSpec::Monomial(m) => match m.c {
                Some(c) if (c.norm() - 1.0).abs() < 1e-12 => Some(m.n as usize),
                _ => None,
            },
            SymbolSpec::SingularInner(_) => None,
            SymbolSpec::Series(c) => {
                let nonzero: Vec<usize> = (0..c.len()).filter(|&k| c[k].norm() > 1e-14).collect();
                match nonzero.as_slice() {
                    [k] if *k > 0 && (c[*k].norm() - 1.0).abs() < 1e-12 => Some(*k),
                    _ => None,
                }
            }
        }
    }

    pub fn is_mobius(&self) -> bool {
        self.blaschke_degree() == Some(1)
    }

    /// `φ(z) = λ z` with `|λ| = 1`.
    pub fn is_rotation(&self) -> bool {
        match self {
            SymbolSpec::Mobius(m) => m.a.norm() == 0.0,
            SymbolSpec::Blaschke(b) => b.degree() == 1 && b.zeros[0].norm() == 0.0,
            SymbolSpec::Monomial(m) => m.n == 1 && self.blaschke_degree() == Some(1),
            SymbolSpec::Series(_) => self.blaschke_degree() == Some(1),
            SymbolSpec::SingularInner(_) => false,
        }
    }

    pub fn is_singular_inner(&self) -> bool {
        matches!(self, SymbolSpec::SingularInner(_))
    }
}

fn search_length(start: usize, ok: impl Fn(usize) -> bool) -> usize {
    let mut hi = start.max(1);
    while !ok(hi) {
        if hi >= MAX_SERIES_LENGTH {
            return MAX_SERIES_LENGTH;
        }
        hi = (hi * 2).min(MAX_SERIES_LENGTH);
    }
    let mut lo = start.max(1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &mut dyn Iterator<Item = Complex64>| {
            v.map(format_complex).collect::<Vec<_>>().join(",")
        };
        match self {
            SymbolSpec::Mobius(m) => write!(
                f,
                "mobius a={} zeta={}",
                format_complex(m.a.value()),
                format_complex(m.zeta)
            ),
            SymbolSpec::Blaschke(b) => write!(
                f,
                "blaschke zeros={} zeta={}",
                join(&mut b.zeros.iter().map(|z| z.value())),
                format_complex(b.zeta)
            ),
            SymbolSpec::Monomial(m) => match m.c {
                Some(c) => write!(f, "monomial n={} c={}", m.n, format_complex(c)),
                None => write!(f, "monomial n={}", m.n),
            },
            SymbolSpec::SingularInner(s) => write!(f, "singular c={}", s.c),
            SymbolSpec::Series(c) => write!(f, "series {}", join(&mut c.iter().copied())),
        }
    }
}

impl FromStr for SymbolSpec {
    type Err = Error;

    /// Parses `mobius a=.. zeta=..`, `blaschke zeros=..,.. zeta=..`,
    /// `monomial n=.. [c=..]`, `singular c=..` and `series c0,c1,..`.
    fn from_str(text: &str) -> Result<Self> {
        let mut words = text.split_whitespace();
        let kind = words
            .next()
            .ok_or_else(|| Error::Parse("empty symbol description".into()))?
            .to_ascii_lowercase();
        let rest: Vec<&str> = words.collect();
        if kind == "series" {
            let joined = rest.concat();
            let coeffs = joined
                .split(',')
                .filter(|t| !t.is_empty())
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()?;
            if coeffs.is_empty() {
                return Err(Error::Parse("series needs at least one coefficient".into()));
            }
            return Ok(SymbolSpec::Series(coeffs));
        }
        let mut fields = std::collections::BTreeMap::new();
        for item in rest {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, found '{item}'")))?;
            fields.insert(k.to_ascii_lowercase(), v.to_string());
        }
        let take = |fields: &mut std::collections::BTreeMap<String, String>, key: &str| {
            fields.remove(key)
        };
        let zeta = |fields: &mut std::collections::BTreeMap<String, String>| -> Result<Complex64> {
            take(fields, "zeta").map(|v| parse_complex(&v)).unwrap_or(Ok(ONE))
        };
        let spec = match kind.as_str() {
            "mobius" | "möbius" => {
                let a = take(&mut fields, "a")
                    .ok_or_else(|| Error::Parse("mobius needs a=<point>".into()))?;
                let a = DiskPoint::new(parse_complex(&a)?)?;
                SymbolSpec::Mobius(MobiusSpec::new(a, zeta(&mut fields)?)?)
            }
            "blaschke" => {
                let zeros = take(&mut fields, "zeros")
                    .ok_or_else(|| Error::Parse("blaschke needs zeros=<p1,p2,..>".into()))?;
                let zeros = zeros
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| DiskPoint::new(parse_complex(t)?))
                    .collect::<Result<Vec<_>>>()?;
                SymbolSpec::Blaschke(BlaschkeSpec::new(zeros, zeta(&mut fields)?)?)
            }
            "monomial" => {
                let n = take(&mut fields, "n")
                    .ok_or_else(|| Error::Parse("monomial needs n=<degree>".into()))?;
                let n: u32 = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid monomial degree '{n}'")))?;
                match take(&mut fields, "c") {
                    Some(c) => SymbolSpec::Monomial(MonomialSpec::new(n, parse_complex(&c)?)?),
                    None => SymbolSpec::Monomial(MonomialSpec::unscaled(n)?),
                }
            }
            "singular" => {
                let c = take(&mut fields, "c").unwrap_or_else(|| "1".into());
                let c: f64 = c
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid singular mass '{c}'")))?;
                SymbolSpec::SingularInner(SingularInnerSpec::new(c)?)
            }
            other => return Err(Error::Parse(format!("unknown symbol kind '{other}'"))),
        };
        if let Some(extra) = fields.keys().next() {
            return Err(Error::Parse(format!("unexpected field '{extra}' for {kind}")));
        }
        Ok(spec)
    }
}

impl Serialize for SymbolSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Truncated Taylor expansion `Σ_{k<L} c_k z^k` of a symbol, with
/// `tail_bound ≥ (Σ_{k≥L} |c_k|²)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesSymbol {
    coeffs: Vec<Complex64>,
    tail_bound: f64,
}

impl PowerSeriesSymbol {
    pub fn new(coeffs: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a series symbol needs a coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("series coefficients must be finite".into()));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid tail bound {tail_bound}")));
        }
        Ok(PowerSeriesSymbol { coeffs, tail_bound })
    }

    /// An exact polynomial symbol.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs, 0.0)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `φ(0)`.
    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.norm() == 0.0) && self.tail_bound == 0.0
    }

    /// `Σ |c_k| + tail_bound`, an upper bound on the sup norm of the truncated symbol.
    pub fn sup_norm_proxy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum::<f64>() + self.tail_bound
    }

    /// Bound on `|φ(z) - eval(z)|` for `|z| ≤ r`.
    pub fn truncation_error_bound(&self, r: f64) -> f64 {
        if self.tail_bound == 0.0 {
            return 0.0;
        }
        self.tail_bound * r.powi(self.coeffs.len() as i32) / (1.0 - r)
    }

    pub fn eval(&self, z: DiskPoint) -> Complex64 {
        series::horner(&self.coeffs, z.value())
    }

    /// Evaluation at a raw complex number already known to lie in the disk.
    pub(crate) fn eval_at(&self, z: Complex64) -> Complex64 {
        series::horner(&self.coeffs, z)
    }

    /// `ψ = φ_a ∘ φ` with `a = φ(0)`, so that `ψ(0) = 0`.
    ///
    /// For an exact polynomial `ψ` is rational and its series is extended
    /// (up to [`MAX_NORMALIZED_LENGTH`] terms) until the tail is negligible.
    pub fn normalize(&self) -> Result<Normalization> {
        let a = self.constant_term();
        if a.norm() >= 1.0 {
            return Err(Error::UnimodularConstant(a.norm()));
        }
        let len = self.len();
        let psi = if a.norm() == 0.0 {
            PowerSeriesSymbol {
                coeffs: self.coeffs.iter().map(|c| -c).collect(),
                tail_bound: self.tail_bound,
            }
        } else {
            let numer: Vec<Complex64> = self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k == 0 { a - c } else { -c })
                .collect();
            let denom: Vec<Complex64> = self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k == 0 { 1.0 - a.conj() * c } else { -a.conj() * c })
                .collect();
            // 1/(1 - ā φ) is the geometric series Σ (ā φ)^k. An exact
            // polynomial gives a rational ψ, so keep doubling until its
            // geometric tail is negligible; truncated inputs keep their length.
            let mut len = len;
            let (mut coeffs, converged) = loop {
                let geom = series::reciprocal(&denom, len).ok_or(Error::UnimodularConstant(a.norm()))?;
                let coeffs = series::mul(&numer, &geom, len);
                let tail: f64 = coeffs[len - len.min(8)..].iter().map(|c| c.norm()).sum();
                let converged = self.tail_bound == 0.0 && tail < 1e-17;
                if self.tail_bound > 0.0 || converged || len >= MAX_NORMALIZED_LENGTH {
                    break (coeffs, converged);
                }
                len = (2 * len).max(32);
            };
            coeffs[0] = Complex64::new(0.0, 0.0);
            let mass: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            // ψ maps into the closed disk when φ does, so ‖ψ‖_{H²} ≤ 1
            let tail_bound = if self.tail_bound == 0.0 && self.is_constant() {
                0.0
            } else if converged {
                1e-17
            } else {
                ((1.0 - mass).max(0.0) + len as f64 * f64::EPSILON).sqrt()
            };
            PowerSeriesSymbol { coeffs, tail_bound }
        };
        Ok(Normalization {
            phi: self.clone(),
            psi,
            a,
        })
    }

    /// Checks membership in the closed unit ball of the multiplier algebra of
    /// `A²_α` on a sampled grid. See [`Admissibility`].
    pub fn admissibility_check(&self, alpha: WeightParameter, grid: usize) -> Result<Admissibility> {
        self.admissibility_check_with_tolerance(alpha, grid, 1e-9)
    }

    pub fn admissibility_check_with_tolerance(
        &self,
        alpha: WeightParameter,
        grid: usize,
        tol: f64,
    ) -> Result<Admissibility> {
        if grid < 16 {
            return Err(Error::InvalidArgument(format!("grid must be at least 16, got {grid}")));
        }
        let angles = 4 * grid;
        let mut sup = 0.0_f64;
        let mut sup_point = Complex64::new(0.0, 0.0);
        let mut effective_radius = 0.0_f64;
        for j in 1..=grid {
            let r = 1.0 - 10f64.powf(-3.0 * j as f64 / grid as f64);
            if self.truncation_error_bound(r) > tol {
                continue;
            }
            effective_radius = r;
            for k in 0..angles {
                let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / angles as f64);
                let v = self.eval_at(z).norm();
                if v > sup {
                    sup = v;
                    sup_point = z;
                }
            }
        }
        let sup_ok = sup <= 1.0 + tol;
        let mut verdict = Admissibility {
            admissible: sup_ok,
            sup_estimate: sup,
            sup_point: format_complex(sup_point),
            witness: (!sup_ok).then(|| format_complex(sup_point)),
            effective_radius,
            pick_min_eigenvalue: None,
            evidence_only: true,
        };
        if alpha.value() < -1.0 {
            // contractive multiplier: (1 - φ(z_i) conj φ(z_j)) K_α(z_i, z_j) ⪰ 0
            let mut points = Vec::new();
            for (ring, r) in [0.3, 0.6, 0.85, 0.95].into_iter().enumerate() {
                for k in 0..grid {
                    let theta = std::f64::consts::TAU * (k as f64 + 0.25 * ring as f64) / grid as f64;
                    points.push(Complex64::from_polar(r, theta));
                }
            }
            let values: Vec<Complex64> = points.iter().map(|&z| self.eval_at(z)).collect();
            let n = points.len();
            let s = alpha.kernel_exponent();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let x = points[i] * points[j].conj();
                (1.0 - values[i] * values[j].conj()) * (1.0 - x).powf(-s)
            });
            let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
            let (lambda, vec) = linalg::min_eigenpair(&m);
            verdict.pick_min_eigenvalue = Some(lambda);
            if lambda < -tol * trace.max(1.0) {
                verdict.admissible = false;
                let worst = (0..n)
                    .max_by(|&i, &j| vec[i].norm().total_cmp(&vec[j].norm()))
                    .unwrap_or(0);
                verdict.witness = Some(format_complex(points[worst]));
            }
        }
        Ok(verdict)
    }
}

/// Result of [`PowerSeriesSymbol::normalize`]: `ψ = φ_a ∘ φ`, `a = φ(0)`, and
/// `g(z) = sqrt(1 - |a|²) / (1 - ā φ(z))` with `K^{α,ψ} = g(z) conj(g(w)) K^{α,φ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub phi: PowerSeriesSymbol,
    pub psi: PowerSeriesSymbol,
    pub a: Complex64,
}

impl Normalization {
    pub fn g(&self, z: DiskPoint) -> Complex64 {
        self.g_at(z.value())
    }

    pub(crate) fn g_at(&self, z: Complex64) -> Complex64 {
        let a = self.a;
        (1.0 - a.norm_sqr()).sqrt() / (1.0 - a.conj() * self.phi.eval_at(z))
    }
}

/// Sampled admissibility verdict. A pass is evidence only: finite grids
/// cannot certify the sup norm or the multiplier norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub sup_estimate: f64,
    pub sup_point: String,
    /// Failing sample point, if any.
    pub witness: Option<String>,
    /// Largest grid radius whose truncation error stayed below tolerance.
    pub effective_radius: f64,
    /// Minimal eigenvalue of the sampled multiplier Pick matrix (`α < -1` only).
    pub pick_min_eigenvalue: Option<f64>,
    pub evidence_only: bool,
}
