//! Finite sections of `T_φ` and of the defect operators
//! `E_φ = I - T_φ T_φ*`, `E_φ̄ = I - T_φ* T_φ` in the monomial orthonormal
//! basis of `A²_α`, together with Berezin transforms, spectra and the
//! diagonal inclusion operators `i*i: A²_γ → A²_γ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix};
use crate::scalars::{basis_weights, WeightParameter};
use crate::symbols::PowerSeriesSymbol;
use crate::{DiskPoint, Error, Result};

/// Hermitian tolerance for defect matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Toeplitz,
    DefectPhi,
    DefectConj,
    InclusionDiag,
}

impl OperatorKind {
    pub fn is_defect(self) -> bool {
        matches!(self, OperatorKind::DefectPhi | OperatorKind::DefectConj)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Toeplitz => "toeplitz",
            OperatorKind::DefectPhi => "defect_phi",
            OperatorKind::DefectConj => "defect_conj",
            OperatorKind::InclusionDiag => "inclusion_diag",
        })
    }
}

/// Which defect operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectSide {
    /// `E_φ = I - T_φ T_φ*`
    Phi,
    /// `E_φ̄ = I - T_φ* T_φ`
    Conj,
}

impl FromStr for DefectSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(DefectSide::Phi),
            "conj" => Ok(DefectSide::Conj),
            _ => Err(Error::Parse(format!("expected 'phi' or 'conj', found '{s}'"))),
        }
    }
}

/// A truncated operator in the orthonormal basis `e_0..e_{N-1}` of `A²_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub alpha: WeightParameter,
    pub kind: OperatorKind,
}

impl OperatorMatrix {
    pub fn basis_size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_asymmetry(&self) -> f64 {
        linalg::max_asymmetry(&self.entries)
    }

    /// `D = E^{1/2}` through the eigendecomposition of `E` (negative
    /// rounding-level eigenvalues are clamped to zero).
    pub fn defect_root(&self) -> Result<CMatrix> {
        if !self.kind.is_defect() {
            return Err(Error::NotDefect(self.kind.to_string()));
        }
        let (values, vectors) = linalg::hermitian_eigen(&self.entries);
        let roots = DVector::from_iterator(
            values.len(),
            values.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
        );
        Ok(&vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint())
    }

    /// Diagonal matrix of [`inclusion_eigenvalues`].
    pub fn inclusion(alpha: WeightParameter, gamma: f64, n: usize) -> Result<Self> {
        let diag = inclusion_eigenvalues(alpha, gamma, n)?;
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(OperatorMatrix {
            entries: CMatrix::from_diagonal(&d),
            alpha,
            kind: OperatorKind::InclusionDiag,
        })
    }
}

fn toeplitz_entries(symbol: &PowerSeriesSymbol, alpha: WeightParameter, n: usize) -> CMatrix {
    let s = basis_weights(alpha, n.saturating_sub(1)).sqrt_values();
    let c = symbol.coeffs();
    let mut t = CMatrix::zeros(n, n);
    for k in 0..n {
        for (j, &cj) in c.iter().enumerate().take(n - k) {
            t[(k + j, k)] = cj * (s[k] / s[k + j]);
        }
    }
    t
}

/// `T_φ` on `span(e_0..e_{n-1})`: `entry(m, k) = c_{m-k} sqrt(w_k / w_m)` for `m ≥ k`.
pub fn toeplitz_matrix(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    n: usize,
) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be at least 1".into()));
    }
    Ok(OperatorMatrix {
        entries: toeplitz_entries(symbol, alpha, n),
        alpha,
        kind: OperatorKind::Toeplitz,
    })
}

/// Top-left `n × n` block of `E_φ` or `E_φ̄`.
///
/// For `E_φ̄` the sums run over `n + L` rows of `T` (`L` the series length),
/// so the block equals the block of the infinite product for the truncated
/// symbol.
pub fn defect_matrix(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    n: usize,
    side: DefectSide,
) -> Result<OperatorMatrix> {
    defect_matrix_padded(symbol, alpha, n, side, symbol.len())
}

/// [`defect_matrix`] with an explicit padding.
pub fn defect_matrix_padded(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    n: usize,
    side: DefectSide,
    padding: usize,
) -> Result<OperatorMatrix> {
    let band = DefectBand::build(symbol, alpha, n, side, padding)?;
    Ok(OperatorMatrix {
        entries: band.to_dense(),
        alpha,
        kind: match side {
            DefectSide::Phi => OperatorKind::DefectPhi,
            DefectSide::Conj => OperatorKind::DefectConj,
        },
    })
}

/// Upper band of a defect matrix: `rows[m][d] = E_{m, m+d}` for `d < L`.
///
/// `E` is Hermitian with bandwidth `L` (the series length), so the band is
/// all that is stored; entries are summed directly from the symbol
/// coefficients instead of through a dense matrix product.
#[derive(Debug, Clone)]
pub struct DefectBand {
    rows: Vec<Vec<Complex64>>,
}

impl DefectBand {
    pub fn build(
        symbol: &PowerSeriesSymbol,
        alpha: WeightParameter,
        n: usize,
        side: DefectSide,
        padding: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix size must be at least 1".into()));
        }
        let c = symbol.coeffs();
        let l = c.len();
        let w = basis_weights(alpha, n + padding);
        let w = w.values();
        let s: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let rows = (0..n)
            .map(|m| {
                let width = l.min(n - m);
                (0..width)
                    .map(|d| {
                        let j = m + d;
                        let mut acc = Complex64::new(0.0, 0.0);
                        match side {
                            DefectSide::Phi => {
                                // (T T*)_{mj} = Σ_{k ≤ m} c_{m-k} conj(c_{j-k}) w_k / (s_m s_j)
                                for k in (j + 1).saturating_sub(l)..=m {
                                    acc += c[m - k] * c[j - k].conj() * w[k];
                                }
                            }
                            DefectSide::Conj => {
                                // (T* T)_{mj} = Σ_{k ≥ j} conj(c_{k-m}) c_{k-j} s_m s_j / w_k
                                let last = (m + l - 1).min(n + padding - 1);
                                for k in j..=last {
                                    acc += c[k - m].conj() * c[k - j] / w[k];
                                }
                            }
                        }
                        let scale = match side {
                            DefectSide::Phi => 1.0 / (s[m] * s[j]),
                            DefectSide::Conj => s[m] * s[j],
                        };
                        let delta = if d == 0 { 1.0 } else { 0.0 };
                        let mut e = Complex64::new(delta, 0.0) - acc * scale;
                        if d == 0 {
                            e.im = 0.0;
                        }
                        e
                    })
                    .collect()
            })
            .collect();
        Ok(DefectBand { rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j >= i {
            self.rows[i].get(j - i).copied().unwrap_or_default()
        } else {
            self.rows[j].get(i - j).copied().unwrap_or_default().conj()
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.size();
        let mut out = CMatrix::zeros(n, n);
        for (m, row) in self.rows.iter().enumerate() {
            for (d, &e) in row.iter().enumerate() {
                out[(m, m + d)] = e;
                out[(m + d, m)] = e.conj();
            }
        }
        out
    }

    /// `Σ_{m,j} E_{mj} x_m conj(y_j)`.
    pub fn bilinear(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, row) in self.rows.iter().enumerate() {
            for (d, &e) in row.iter().enumerate() {
                let j = m + d;
                acc += e * x[m] * y[j].conj();
                if d > 0 {
                    acc += e.conj() * x[j] * y[m].conj();
                }
            }
        }
        acc
    }
}

/// Coefficients of the normalized kernel `k_a` in the basis `e_m`:
/// `(1-|a|²)^{(2+α)/2} sqrt(w_m) ā^m`.
pub fn normalized_kernel_coefficients(
    alpha: WeightParameter,
    a: DiskPoint,
    n: usize,
) -> DVector<Complex64> {
    let s = basis_weights(alpha, n.saturating_sub(1)).sqrt_values();
    let scale = (1.0 - a.value().norm_sqr()).powf(alpha.kernel_exponent() / 2.0);
    let abar = a.conj();
    let mut pow = Complex64::new(scale, 0.0);
    DVector::from_iterator(
        n,
        s.iter().map(|&sm| {
            let v = pow * sm;
            pow *= abar;
            v
        }),
    )
}

/// Berezin transform `⟨E k_a, k_a⟩` of a defect matrix, with `k_a` truncated
/// to the matrix size.
pub fn berezin(defect: &OperatorMatrix, a: DiskPoint) -> Result<f64> {
    if !defect.kind.is_defect() {
        return Err(Error::NotDefect(defect.kind.to_string()));
    }
    let k = normalized_kernel_coefficients(defect.alpha, a, defect.basis_size());
    let ek = &defect.entries * &k;
    Ok(k.dotc(&ek).re)
}

/// Inclusive index range `start..=end` used for decay fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: usize,
    pub end: usize,
}

impl FitWindow {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 || end <= start + 1 {
            return Err(Error::InvalidArgument(format!(
                "fit window {start}:{end} must satisfy 1 <= start < end - 1"
            )));
        }
        Ok(FitWindow { start, end })
    }
}

impl FromStr for FitWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected window 'a:b', found '{s}'")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid window bound '{t}'")))
        };
        FitWindow::new(parse(a)?, parse(b)?)
    }
}

impl fmt::Display for FitWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenEstimate {
    pub p: f64,
    /// `(Σ_{n < usable} λ_n^p)^{1/p}`.
    pub partial_norm: f64,
    /// False when the last included term exceeds 1% of the partial sum.
    pub tail_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Leading eigenvalues used for fits and Schatten sums (the last quarter
    /// of a finite section is excluded).
    pub usable: usize,
    /// Least-squares slope of `log λ_n` against `log(n+1)` over the window.
    pub decay_exponent: f64,
    pub window: FitWindow,
    pub schatten: Vec<SchattenEstimate>,
}

pub const SCHATTEN_EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// Spectrum of a Hermitian truncated operator with decay fit and Schatten sums.
pub fn spectrum(defect: &OperatorMatrix, window: FitWindow) -> Result<SpectrumReport> {
    let asym = defect.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian(asym));
    }
    let n = defect.basis_size();
    let usable = n * 3 / 4;
    if window.end > usable {
        return Err(Error::InvalidArgument(format!(
            "fit window {window} extends past the usable range 1..{usable} of an {n}x{n} section"
        )));
    }
    let mut eigenvalues = linalg::hermitian_eigenvalues(&defect.entries);
    eigenvalues.reverse();
    let decay_exponent = fit_decay(&eigenvalues, window)?;
    let schatten = SCHATTEN_EXPONENTS
        .iter()
        .map(|&p| {
            let terms: Vec<f64> = eigenvalues[..usable].iter().map(|&l| l.max(0.0).powf(p)).collect();
            let sum: f64 = terms.iter().sum();
            let last = terms.last().copied().unwrap_or(0.0);
            SchattenEstimate {
                p,
                partial_norm: sum.powf(1.0 / p),
                tail_converged: last <= 0.01 * sum,
            }
        })
        .collect();
    Ok(SpectrumReport {
        eigenvalues,
        usable,
        decay_exponent,
        window,
        schatten,
    })
}

/// Slope of `log λ_n` vs `log(n+1)` over an inclusive window of a descending sequence.
pub fn fit_decay(eigenvalues: &[f64], window: FitWindow) -> Result<f64> {
    if window.end >= eigenvalues.len() {
        return Err(Error::InvalidArgument(format!(
            "fit window {window} exceeds {} eigenvalues",
            eigenvalues.len()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, &l) in eigenvalues.iter().enumerate().take(window.end + 1).skip(window.start) {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue {l:e} at index {n} is not positive; cannot fit a power law"
            )));
        }
        xs.push(((n + 1) as f64).ln());
        ys.push(l.ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Eigenvalues `w_n(γ)/w_n(α)`, `n = 0..=n_max`, of the diagonal operator
/// `i*i` for the inclusion `A²_γ ⊂ A²_α`.
pub fn inclusion_eigenvalues(alpha: WeightParameter, gamma: f64, n_max: usize) -> Result<Vec<f64>> {
    let gamma_w = WeightParameter::new(gamma)?;
    let (a, g) = (alpha.value(), gamma_w.value());
    if g >= a {
        return Err(Error::InvalidArgument(format!(
            "inclusion needs gamma < alpha, got gamma = {g}, alpha = {a}"
        )));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut r = 1.0_f64;
    out.push(r);
    for k in 0..n_max {
        r *= (k as f64 + 2.0 + g) / (k as f64 + 2.0 + a);
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alpha(a: f64) -> WeightParameter {
        WeightParameter::new(a).unwrap()
    }

    fn series(text: &str) -> PowerSeriesSymbol {
        text.parse::<SymbolSpec>().unwrap().default_series().unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn toeplitz_examples() {
        let t = toeplitz_matrix(&series("series 0,1"), alpha(0.0), 6).unwrap();
        for k in 0..5 {
            let want = ((k as f64 + 1.0) / (k as f64 + 2.0)).sqrt();
            assert!((t.entries[(k + 1, k)] - c(want)).norm() < 1e-15);
        }
        assert!((t.entries[(1, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.entries[(0, 1)], c(0.0));

        let id = toeplitz_matrix(&series("series 1"), alpha(0.7), 5).unwrap();
        assert_eq!(id.entries, CMatrix::identity(5, 5));

        let shift = toeplitz_matrix(&series("series 0,1"), alpha(-1.0), 5).unwrap();
        for k in 0..4 {
            assert_eq!(shift.entries[(k + 1, k)], c(1.0));
        }
        assert!(toeplitz_matrix(&series("series 0,1"), alpha(0.0), 0).is_err());
    }

    #[test]
    fn defect_examples() {
        let e = defect_matrix(&series("series 0,1"), alpha(0.0), 8, DefectSide::Conj).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 / (i as f64 + 2.0) } else { 0.0 };
                assert!((e.entries[(i, j)] - c(want)).norm() < 1e-15);
            }
        }
        let hardy = defect_matrix(&series("series 0,1"), alpha(-1.0), 8, DefectSide::Conj).unwrap();
        assert!(hardy.entries.iter().all(|x| x.norm() == 0.0));
        let hardy = defect_matrix(&series("series 0,1"), alpha(-1.0), 8, DefectSide::Phi).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(hardy.entries[(i, j)], c(want));
            }
        }
    }

    #[test]
    fn defect_matrices_are_hermitian_contractions() {
        for text in ["blaschke zeros=0.5,-0.3+0.2i", "mobius a=0.6i", "singular c=1", "monomial n=2 c=0.7"] {
            let s = series(text);
            for side in [DefectSide::Phi, DefectSide::Conj] {
                let e = defect_matrix(&s, alpha(0.5), 60, side).unwrap();
                assert!(e.max_asymmetry() < 1e-12);
                let ev = linalg::hermitian_eigenvalues(&e.entries);
                assert!(ev[0] >= -1e-9 && *ev.last().unwrap() <= 1.0 + 1e-9, "{text}: {ev:?}");
            }
        }
    }

    #[test]
    fn band_sums_match_dense_products() {
        for text in ["blaschke zeros=0.5,-0.3+0.2i", "singular c=2", "series 0.1,0.2i,0,0.5"] {
            let s = text.parse::<SymbolSpec>().unwrap().to_series(30).unwrap();
            let a = alpha(-0.4);
            let n = 25;
            let t = toeplitz_entries(&s, a, n + s.len());
            let cols = t.columns(0, n);
            let conj = CMatrix::identity(n, n) - cols.adjoint() * cols;
            let t = toeplitz_entries(&s, a, n);
            let phi = CMatrix::identity(n, n) - &t * t.adjoint();
            let e = defect_matrix(&s, a, n, DefectSide::Conj).unwrap().entries;
            assert!(linalg::max_abs(&(e - conj)) < 1e-13, "{text}");
            let e = defect_matrix(&s, a, n, DefectSide::Phi).unwrap().entries;
            assert!(linalg::max_abs(&(e - phi)) < 1e-13, "{text}");
        }
    }

    #[test]
    fn padding_beyond_series_length_changes_nothing() {
        let s = series("blaschke zeros=0.5,-0.3+0.2i");
        let base = defect_matrix(&s, alpha(0.3), 40, DefectSide::Conj).unwrap();
        for extra in [1, 17, 100] {
            let more = defect_matrix_padded(&s, alpha(0.3), 40, DefectSide::Conj, s.len() + extra).unwrap();
            let diff = linalg::max_abs(&(&base.entries - &more.entries));
            assert!(diff < 1e-14, "extra {extra}: {diff:e}");
        }
    }

    #[test]
    fn defect_root_squares_back() {
        let s = series("blaschke zeros=0.5,-0.5");
        let e = defect_matrix(&s, alpha(0.0), 30, DefectSide::Phi).unwrap();
        let d = e.defect_root().unwrap();
        assert!(linalg::max_abs(&(&d * &d - &e.entries)) < 1e-10);
        let t = toeplitz_matrix(&s, alpha(0.0), 5).unwrap();
        assert!(t.defect_root().is_err());
    }

    #[test]
    fn intertwining_identity() {
        // (I - T T*) T v = T (I - T* T) v for v supported in the first n - L coordinates
        let s = series("blaschke zeros=0.5,-0.3+0.2i,0.1i");
        let a = alpha(0.4);
        let n = s.len() + 40;
        let t = toeplitz_matrix(&s, a, n).unwrap().entries;
        let ephi = defect_matrix(&s, a, n, DefectSide::Phi).unwrap().entries;
        let econj = defect_matrix(&s, a, n, DefectSide::Conj).unwrap().entries;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let support = n - s.len();
        let v = DVector::from_fn(n, |i, _| {
            if i < support {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            } else {
                c(0.0)
            }
        });
        let lhs = &ephi * (&t * &v);
        let rhs = &t * (&econj * &v);
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn berezin_examples() {
        let z = series("series 0,1");
        let e = defect_matrix(&z, alpha(0.0), 50, DefectSide::Phi).unwrap();
        assert!((berezin(&e, DiskPoint::ORIGIN).unwrap() - 1.0).abs() < 1e-15);

        let e = defect_matrix(&z, alpha(0.0), 200, DefectSide::Phi).unwrap();
        let v = berezin(&e, DiskPoint::real(0.6).unwrap()).unwrap();
        assert!((v - 0.64).abs() < 1e-8, "{v}");

        let sing = "singular c=1".parse::<SymbolSpec>().unwrap().to_series(600).unwrap();
        let e = defect_matrix(&sing, alpha(0.0), 600, DefectSide::Phi).unwrap();
        let v = berezin(&e, DiskPoint::real(0.9).unwrap()).unwrap();
        let oracle = 1.0 - (-38.0f64).exp();
        assert!((v - oracle).abs() < 1e-6, "{v}");

        let t = toeplitz_matrix(&z, alpha(0.0), 5).unwrap();
        assert!(matches!(berezin(&t, DiskPoint::ORIGIN), Err(Error::NotDefect(_))));
    }

    #[test]
    fn berezin_identity_for_admissible_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for text in ["mobius a=0.5", "blaschke zeros=0.5,-0.3+0.2i", "monomial n=3 c=0.8", "singular c=1"] {
            let spec: SymbolSpec = text.parse().unwrap();
            let s = spec.to_series(400).unwrap();
            let e = defect_matrix(&s, alpha(0.2), 400, DefectSide::Phi).unwrap();
            for _ in 0..6 {
                let a = DiskPoint::from_polar(0.8 * rng.random::<f64>(), rng.random::<f64>() * 6.3).unwrap();
                let want = 1.0 - spec.eval_closed(a.value()).unwrap().norm_sqr();
                let got = berezin(&e, a).unwrap();
                assert!((got - want).abs() < 1e-6, "{text} at {a}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let e = defect_matrix(&series("series 0,1"), alpha(0.0), 400, DefectSide::Conj).unwrap();
        let r = spectrum(&e, FitWindow::new(10, 200).unwrap()).unwrap();
        for (k, &l) in r.eigenvalues.iter().enumerate() {
            assert!((l - 1.0 / (k as f64 + 2.0)).abs() < 1e-12);
        }
        assert!((r.decay_exponent + 1.0).abs() < 0.02, "{}", r.decay_exponent);
        assert_eq!(r.usable, 300);
        // λ_n ~ 1/n is not trace class: the p = 1 sum is flagged, p = 3 is not
        assert!(r.schatten.iter().find(|s| s.p == 3.0).unwrap().tail_converged);

        let zero = series("series 0");
        let e = defect_matrix(&zero, alpha(0.0), 40, DefectSide::Phi).unwrap();
        let r = spectrum(&e, FitWindow::new(1, 20).unwrap()).unwrap();
        assert!(r.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!(r.decay_exponent.abs() < 1e-10);

        assert!(spectrum(&e, FitWindow::new(1, 31).unwrap()).is_err());
        let mut bad = e.clone();
        bad.entries[(0, 1)] = c(0.5);
        assert!(matches!(spectrum(&bad, FitWindow::new(1, 20).unwrap()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn blaschke_spectrum_decays_like_one_over_n() {
        let s = series("blaschke zeros=0.5,-0.5");
        let e = defect_matrix(&s, alpha(0.0), 400, DefectSide::Phi).unwrap();
        let r = spectrum(&e, FitWindow::new(20, 200).unwrap()).unwrap();
        assert!((r.decay_exponent + 1.0).abs() < 0.15, "{}", r.decay_exponent);
    }

    #[test]
    fn finite_sections_agree_on_top_quarter() {
        // inner symbols only: for non-inner polynomials the top of the spectrum of
        // E_φ sits on continuous spectrum and finite sections converge slowly
        for text in ["series 0,1", "series 0,0,1", "series 0,0,0,0.6+0.8i", "blaschke zeros=0.5,-0.5", "mobius a=0.3i"] {
            let s = series(text);
            for side in [DefectSide::Phi, DefectSide::Conj] {
                let small = defect_matrix(&s, alpha(0.0), 200, side).unwrap();
                let big = defect_matrix(&s, alpha(0.0), 400, side).unwrap();
                let mut a = linalg::hermitian_eigenvalues(&small.entries);
                let mut b = linalg::hermitian_eigenvalues(&big.entries);
                a.reverse();
                b.reverse();
                for k in 0..50 {
                    assert!((a[k] - b[k]).abs() < 1e-6, "{text} {side:?} k={k}: {} vs {}", a[k], b[k]);
                }
            }
        }
    }

    #[test]
    fn inclusion_examples() {
        let v = inclusion_eigenvalues(alpha(0.0), -1.0, 3).unwrap();
        let want = [1.0, 0.5, 1.0 / 3.0, 0.25];
        for (g, w) in v.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        let v = inclusion_eigenvalues(alpha(0.5), -1.5, 64).unwrap();
        for (n, x) in v.iter().enumerate().skip(48) {
            let scaled = x * ((n + 1) as f64).powi(2);
            assert!((0.25..=4.0).contains(&scaled), "n={n}: {scaled}");
        }
        assert_eq!(inclusion_eigenvalues(alpha(0.5), 0.0, 0).unwrap(), vec![1.0]);
        assert!(inclusion_eigenvalues(alpha(0.0), 0.0, 3).is_err());
        assert!(inclusion_eigenvalues(alpha(0.0), -2.5, 3).is_err());
        let m = OperatorMatrix::inclusion(alpha(0.0), -1.0, 3).unwrap();
        assert_eq!(m.kind, OperatorKind::InclusionDiag);
        assert_eq!(m.entries[(3, 3)], c(0.25));
    }

    #[test]
    fn csv_round_trip() {
        let e = defect_matrix(&series("mobius a=0.3+0.2i"), alpha(0.0), 6, DefectSide::Phi).unwrap();
        let mut buf = Vec::new();
        linalg::write_csv(&e.entries, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("c0_re,c0_im,c1_re"));
        let back = linalg::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, e.entries);
    }
}
