//! Weight-parameter arithmetic, orthonormal-basis weights and binomial series.
//!
//! The monomials `e_n(z) = sqrt(w_n) z^n` with
//! `w_n = Γ(n+2+α) / (n! Γ(2+α))` form an orthonormal basis of `A²_α` for
//! every `α > -2`. Gamma ratios are only ever formed through the recurrence
//! `w_{n+1} = w_n (n+2+α)/(n+1)`; raw Gamma overflows past `n ≈ 170`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The weight exponent `α` of `A²_α`, always `> -2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WeightParameter(f64);

impl WeightParameter {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > -2.0 {
            Ok(WeightParameter(alpha))
        } else {
            Err(Error::AlphaOutOfRange(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Kernel exponent `2 + α`.
    #[inline]
    pub fn kernel_exponent(self) -> f64 {
        2.0 + self.0
    }

    /// Checks the stronger `α > -1` requirement of operations that integrate
    /// against the finite measure `dA_α`.
    pub fn require_above_minus_one(self, op: &'static str) -> Result<Self> {
        if self.0 > -1.0 {
            Ok(self)
        } else {
            Err(Error::AlphaNotAboveMinusOne { op, alpha: self.0 })
        }
    }
}

impl TryFrom<f64> for WeightParameter {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        WeightParameter::new(alpha)
    }
}

impl From<WeightParameter> for f64 {
    fn from(a: WeightParameter) -> f64 {
        a.0
    }
}

impl std::fmt::Display for WeightParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Squared norms `w_0..w_N` of the monomial orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisWeights {
    alpha: WeightParameter,
    values: Vec<f64>,
}

impl BasisWeights {
    pub fn alpha(&self) -> WeightParameter {
        self.alpha
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// `sqrt(w_n)`, the coefficient of `z^n` in `e_n`.
    pub fn sqrt_values(&self) -> Vec<f64> {
        self.values.iter().map(|w| w.sqrt()).collect()
    }
}

/// Returns `w_0..w_{n_max}` for the given weight.
pub fn basis_weights(alpha: WeightParameter, n_max: usize) -> BasisWeights {
    let a = alpha.value();
    let mut values = Vec::with_capacity(n_max + 1);
    let mut w = 1.0_f64;
    values.push(w);
    for n in 0..n_max {
        w *= (n as f64 + 2.0 + a) / (n as f64 + 1.0);
        values.push(w);
    }
    BasisWeights { alpha, values }
}

/// Taylor coefficients of `(1 - x)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialSeries {
    s: f64,
    coeffs: Vec<f64>,
}

impl BinomialSeries {
    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Partial sum `Σ_{n ≤ N} c_n x^n`.
    pub fn partial_sum(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Magnitude of the first omitted term at `x`, `|c_{N+1}| x^{N+1}`.
    pub fn first_omitted_term(&self, x: f64) -> f64 {
        let n = self.coeffs.len() - 1;
        let next = self.coeffs[n] * (n as f64 - self.s) / (n as f64 + 1.0);
        (next * x.powi(n as i32 + 1)).abs()
    }
}

/// Coefficients `c_0..c_{n_max}` of `(1 - x)^s` via `c_{n+1} = c_n (n - s)/(n + 1)`.
pub fn binomial_coeffs(s: f64, n_max: usize) -> Result<BinomialSeries> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("binomial exponent {s} is not finite")));
    }
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut c = 1.0_f64;
    coeffs.push(c);
    for n in 0..n_max {
        c *= (n as f64 - s) / (n as f64 + 1.0);
        if !c.is_finite() {
            return Err(Error::NoConvergence(format!(
                "binomial coefficient overflow at n = {} for s = {s}",
                n + 1
            )));
        }
        coeffs.push(c);
    }
    Ok(BinomialSeries { s, coeffs })
}

/// Ratios `r_n = w_n / (n+1)^{α+1}` and their spread over the last quarter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub ratios: Vec<f64>,
    /// `(max - min) / mean` of `r_n` over the last quarter of indices.
    pub tail_oscillation: f64,
}

pub fn weight_asymptote_check(weights: &BasisWeights) -> Result<AsymptoteReport> {
    if weights.len() < 32 {
        return Err(Error::InvalidArgument(format!(
            "asymptote check needs at least 32 weights, got {}",
            weights.len()
        )));
    }
    let a = weights.alpha().value();
    let ratios: Vec<f64> = weights
        .values()
        .iter()
        .enumerate()
        .map(|(n, w)| w / (n as f64 + 1.0).powf(a + 1.0))
        .collect();
    let tail = &ratios[ratios.len() * 3 / 4..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(AsymptoteReport {
        ratios,
        tail_oscillation: (hi - lo) / mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::{gamma, ln_gamma};

    fn alpha(a: f64) -> WeightParameter {
        WeightParameter::new(a).unwrap()
    }

    #[test]
    fn rejects_alpha_at_or_below_minus_two() {
        assert!(WeightParameter::new(-2.0).is_err());
        assert!(WeightParameter::new(-2.5).is_err());
        assert!(WeightParameter::new(f64::NAN).is_err());
        assert!(WeightParameter::new(-1.999).is_ok());
        assert!(alpha(-1.0).require_above_minus_one("x").is_err());
        assert!(alpha(-0.99).require_above_minus_one("x").is_ok());
    }

    #[test]
    fn basis_weight_examples() {
        assert_eq!(basis_weights(alpha(0.0), 3).values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(basis_weights(alpha(-1.0), 3).values(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(basis_weights(alpha(0.3), 0).values(), &[1.0]);
    }

    #[test]
    fn half_integer_weights_match_log_gamma() {
        let w = basis_weights(alpha(0.5), 2);
        let expected = [1.0, 2.5, 4.375];
        for (n, (&got, &want)) in w.values().iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-14, "w_{n}");
            let oracle =
                (ln_gamma(n as f64 + 2.5) - ln_gamma(n as f64 + 1.0) - ln_gamma(2.5)).exp();
            assert!((got - oracle).abs() / oracle < 1e-12);
        }
    }

    #[test]
    fn binomial_examples() {
        let b = binomial_coeffs(2.0, 4).unwrap();
        assert_eq!(b.coeffs(), &[1.0, -2.0, 1.0, 0.0, 0.0]);
        let b = binomial_coeffs(1.5, 3).unwrap();
        let want = [1.0, -1.5, 0.375, 0.0625];
        for (g, w) in b.coeffs().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        let b = binomial_coeffs(1.5, 60).unwrap();
        let oracle = 0.5_f64.powf(1.5);
        assert!((b.partial_sum(0.5) - oracle).abs() < 1e-8);
        assert!((oracle - 0.353553).abs() < 1e-6);
        // tail terms shrink at least geometrically with ratio x, so the tail is below first/(1-x)
        assert!((b.partial_sum(0.5) - oracle).abs() <= b.first_omitted_term(0.5) * 2.0 + 1e-15);
    }

    #[test]
    fn binomial_reconstruction_is_one_sided() {
        for s in [0.3, 1.5, 1.9] {
            for x in [0.1_f64, 0.5, 0.9] {
                let b = binomial_coeffs(s, 4000).unwrap();
                let target = (1.0 - x).powf(s);
                let c = b.coeffs();
                let mut partial = 0.0;
                let mut prev_err = f64::INFINITY;
                for (n, &cn) in c.iter().enumerate() {
                    partial += cn * x.powi(n as i32);
                    if n >= 3 {
                        let err = partial - target;
                        // fixed-sign tail: s in (1,2) tails are positive so partial sums
                        // approach from below; s in (0,1) tails are negative
                        if s > 1.0 {
                            assert!(err <= 1e-15, "s={s} x={x} n={n} err={err}");
                        } else {
                            assert!(err >= -1e-15, "s={s} x={x} n={n} err={err}");
                        }
                        assert!(err.abs() <= prev_err + 1e-15);
                        prev_err = err.abs();
                    }
                }
                assert!(prev_err < 1e-8, "s={s} x={x} residual {prev_err}");
            }
        }
    }

    #[test]
    fn asymptote_examples() {
        for a in [0.0, -1.0] {
            let r = weight_asymptote_check(&basis_weights(alpha(a), 63)).unwrap();
            assert!(r.ratios.iter().all(|&v| (v - 1.0).abs() < 1e-12));
            assert!(r.tail_oscillation < 1e-12);
        }
        let r = weight_asymptote_check(&basis_weights(alpha(0.5), 255)).unwrap();
        assert!(r.tail_oscillation < 1e-2);
        let limit = 1.0 / gamma(2.5);
        assert!((r.ratios.last().unwrap() - limit).abs() / limit < 1e-2);
        assert!(weight_asymptote_check(&basis_weights(alpha(0.5), 30)).is_err());
    }

    proptest! {
        #[test]
        fn recurrence_matches_log_gamma(a in -1.999f64..3.0, n in 0usize..=200) {
            let w = basis_weights(alpha(a), n);
            let oracle = (ln_gamma(n as f64 + 2.0 + a) - ln_gamma(n as f64 + 1.0)
                - ln_gamma(2.0 + a)).exp();
            let got = w.get(n);
            prop_assert!(got.is_finite() && got > 0.0);
            prop_assert!((got - oracle).abs() / oracle < 1e-10, "got {} oracle {}", got, oracle);
        }

        #[test]
        fn sign_pattern_between_one_and_two(s in 1.0001f64..1.9999) {
            let b = binomial_coeffs(s, 80).unwrap();
            prop_assert!(b.coeffs()[2..].iter().all(|&c| c > 0.0));
        }

        #[test]
        fn sign_pattern_between_zero_and_one(s in 0.0001f64..0.9999) {
            let b = binomial_coeffs(s, 80).unwrap();
            prop_assert!(b.coeffs()[1..].iter().all(|&c| c < 0.0));
        }
    }
}
