//! Truncated formal power series over `Complex64`.
//!
//! All routines return exactly `len` coefficients; coefficient `k` of a
//! result depends only on coefficients `0..=k` of the inputs, so truncation
//! never contaminates the retained part.

use num_complex::Complex64;

/// Truncated Cauchy product.
pub fn mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `1 / a` truncated to `len` terms. Requires `a[0] != 0`.
pub fn reciprocal(a: &[Complex64], len: usize) -> Option<Vec<Complex64>> {
    let a0 = *a.first()?;
    if a0.norm() == 0.0 {
        return None;
    }
    let inv0 = 1.0 / a0;
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        if n == 0 {
            out.push(inv0);
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n.min(a.len() - 1) {
            acc += a[k] * out[n - k];
        }
        out.push(-acc * inv0);
    }
    Some(out)
}

/// `exp(u)` via `n f_n = Σ_{k=1}^{n} k u_k f_{n-k}`.
pub fn exp(u: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut f = Vec::with_capacity(len);
    if len == 0 {
        return f;
    }
    f.push(u.first().copied().unwrap_or_default().exp());
    for n in 1..len {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n.min(u.len().saturating_sub(1)) {
            acc += u[k] * (k as f64) * f[n - k];
        }
        f.push(acc / n as f64);
    }
    f
}

/// Horner evaluation.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
