//! Dense Hermitian eigensolvers and positivity tests.
//!
//! [`hermitian_eigen`] is the production solver (Householder
//! tridiagonalization with implicit QR, from nalgebra). [`jacobi_eigen`] is
//! the cyclic Jacobi reference used to re-verify certificates independently.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `max_{i,j} |m_ij - conj(m_ji)|`.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and unit eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue with its eigenvector.
pub fn min_eigenpair(m: &CMatrix) -> (f64, DVector<Complex64>) {
    let (values, vectors) = hermitian_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

/// Cyclic Jacobi for complex Hermitian matrices.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation. Sweeps stop when the
/// off-diagonal Frobenius norm drops below `tol · ‖A‖_F`.
pub fn jacobi_eigen(m: &CMatrix, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let asym = max_asymmetry(m);
    let scale = m.norm();
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    let mut a = hermitian_part(m);
    let mut v = CMatrix::identity(n, n);
    let off = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..max_sweeps {
        if off(&a) <= tol * scale.max(f64::MIN_POSITIVE) {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
            let values = order.iter().map(|&k| a[(k, k)].re).collect();
            let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
            return Ok((values, vectors));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }
    Err(Error::NoConvergence(format!(
        "Jacobi did not converge in {max_sweeps} sweeps"
    )))
}

/// Outcome of a diagonally pivoted Cholesky factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyOutcome {
    pub psd: bool,
    /// Number of pivots above the tolerance.
    pub rank: usize,
    /// Most negative pivot encountered, if any fell below `-tol`.
    pub negative_pivot: Option<f64>,
}

/// Decides positive semidefiniteness by pivoted Cholesky: the matrix is
/// declared PSD when every Schur-complement diagonal stays above `-tol`.
pub fn pivoted_cholesky(m: &CMatrix, tol: f64) -> CholeskyOutcome {
    let n = m.nrows();
    let mut a = hermitian_part(m);
    let mut rank = 0;
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let (pos, &piv) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &x), (_, &y)| a[(x, x)].re.total_cmp(&a[(y, y)].re))
            .unwrap();
        let d = a[(piv, piv)].re;
        let min_diag = remaining.iter().map(|&k| a[(k, k)].re).fold(f64::INFINITY, f64::min);
        if min_diag < -tol {
            return CholeskyOutcome {
                psd: false,
                rank,
                negative_pivot: Some(min_diag),
            };
        }
        if d <= tol {
            // remaining Schur complement must vanish; any large off-diagonal breaks PSD
            for &i in &remaining {
                for &j in &remaining {
                    let bound = (a[(i, i)].re.max(0.0) * a[(j, j)].re.max(0.0)).sqrt() + tol;
                    if a[(i, j)].norm() > bound {
                        return CholeskyOutcome {
                            psd: false,
                            rank,
                            negative_pivot: Some(-a[(i, j)].norm()),
                        };
                    }
                }
            }
            break;
        }
        remaining.swap_remove(pos);
        rank += 1;
        for &i in &remaining {
            for &j in &remaining {
                let update = a[(i, piv)] * a[(piv, j)] / d;
                a[(i, j)] -= update;
            }
        }
    }
    CholeskyOutcome {
        psd: true,
        rank,
        negative_pivot: None,
    }
}

/// Writes a complex matrix as CSV: a header row `c0_re,c0_im,c1_re,..`
/// followed by one row per matrix row.
pub fn write_csv<W: std::io::Write>(m: &CMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|j| [format!("c{j}_re"), format!("c{j}_im")])
        .collect();
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .flat_map(|j| [m[(i, j)].re.to_string(), m[(i, j)].im.to_string()])
            .collect();
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("flush", "<csv>", e))?;
    Ok(())
}

/// Reads a matrix written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<CMatrix> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let nums = rec
            .iter()
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse("odd number of columns in complex CSV".into()));
        }
        rows.push(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix CSV".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// `max_{i,j} |m_ij|`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
