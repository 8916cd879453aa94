//! Complete Nevanlinna–Pick tests: a kernel normalized at the origin
//! (`K(z, 0) = 1`) has the CNP property iff `[1 - 1/K(z_i, z_j)]` is positive
//! semidefinite for every finite point set.

use std::fmt;
use std::io::{Read, Write};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernels::{KernelEvaluator, KernelSpec};
use crate::linalg::{self, CMatrix};
use crate::sampler::{hyperbolic_sample, trial_rng};
use crate::scalars::WeightParameter;
use crate::symbols::PowerSeriesSymbol;
use crate::{DiskPoint, Error, Result};

/// Kernel values below this modulus are refused as divisors.
pub const DIVISION_HAZARD: f64 = 1e-12;
/// Default relative tolerance of [`psd_test`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PickMatrix {
    pub points: Vec<DiskPoint>,
    pub entries: CMatrix,
    pub alpha: WeightParameter,
    /// `ψ = φ_a ∘ φ`, `ψ(0) = 0`.
    pub symbol_normalized: PowerSeriesSymbol,
}

impl PickMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.entries[(i, i)].re).sum()
    }
}

/// `M_ij = 1 - 1/K^{α,ψ}(z_i, z_j)` where `ψ` normalizes `symbol` at the origin.
///
/// Admissibility of `symbol` is the caller's responsibility; see
/// [`PowerSeriesSymbol::admissibility_check`].
pub fn build_pick(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    points: &[DiskPoint],
) -> Result<PickMatrix> {
    if symbol.is_constant() {
        return Err(Error::InvalidArgument("Pick matrices need a non-constant symbol".into()));
    }
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::InvalidArgument(format!("repeated point {}", points[i])));
            }
        }
    }
    let psi = symbol.normalize()?.psi;
    let kernel = KernelEvaluator::new(KernelSpec::sub(alpha, psi.clone()))?;
    let n = points.len();
    let mut entries = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(points[i], points[j])?;
            if k.norm() < DIVISION_HAZARD {
                return Err(Error::DivisionHazard { i, j, value: k.norm() });
            }
            let m = 1.0 - 1.0 / k;
            entries[(i, j)] = m;
            entries[(j, i)] = m.conj();
        }
        entries[(i, i)].im = 0.0;
    }
    Ok(PickMatrix {
        points: points.to_vec(),
        entries,
        alpha,
        symbol_normalized: psi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "psd_pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "psd_pass",
            Verdict::Fail => "fail",
        })
    }
}

/// A point subset whose Pick matrix is not positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Indices into the sampled point list.
    pub indices: Vec<usize>,
    pub points: Vec<DiskPoint>,
    /// Smallest eigenvalue of the principal submatrix on `indices`.
    pub min_eigenvalue: f64,
    /// Its unit eigenvector.
    pub eigenvector: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickReport {
    pub verdict: Verdict,
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// `tolerance · max(1, trace)`; the test passes iff `λ_min ≥ -threshold`.
    pub threshold: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub trials: usize,
    pub sampler_seed: Option<u64>,
    /// Index of the trial this report describes.
    pub worst_trial: Option<usize>,
    /// `λ_min` of every completed trial, in trial order.
    pub trial_min_eigenvalues: Vec<f64>,
    /// Trials abandoned because a kernel value was too small to invert.
    pub hazards: Vec<String>,
    /// A failure is a certificate; a pass is evidence only.
    pub certificate: bool,
}

/// Minimal eigenvalue test with greedy witness pruning on failure.
pub fn psd_test(matrix: &PickMatrix, tolerance: f64) -> Result<PickReport> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let trace = matrix.trace();
    let threshold = tolerance * trace.max(1.0);
    if matrix.is_empty() {
        return Ok(pass_report(0.0, trace, threshold, tolerance));
    }
    let (lambda, _) = linalg::min_eigenpair(&matrix.entries);
    if lambda >= -threshold {
        return Ok(pass_report(lambda, trace, threshold, tolerance));
    }
    let witness = prune_witness(matrix, lambda, threshold);
    Ok(PickReport {
        verdict: Verdict::Fail,
        min_eigenvalue: lambda,
        trace,
        threshold,
        tolerance,
        witness: Some(witness),
        trials: 1,
        sampler_seed: None,
        worst_trial: None,
        trial_min_eigenvalues: vec![lambda],
        hazards: Vec::new(),
        certificate: true,
    })
}

fn pass_report(lambda: f64, trace: f64, threshold: f64, tolerance: f64) -> PickReport {
    PickReport {
        verdict: Verdict::Pass,
        min_eigenvalue: lambda,
        trace,
        threshold,
        tolerance,
        witness: None,
        trials: 1,
        sampler_seed: None,
        worst_trial: None,
        trial_min_eigenvalues: vec![lambda],
        hazards: Vec::new(),
        certificate: false,
    }
}

fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Drops points, smallest eigenvector weight first, as long as the remaining
/// submatrix keeps at least half of the full negative eigenvalue (and stays
/// below the failure threshold), so the witness remains a robust certificate.
fn prune_witness(matrix: &PickMatrix, lambda: f64, threshold: f64) -> Witness {
    let keep_below = (0.5 * lambda).min(-threshold);
    let mut idx: Vec<usize> = (0..matrix.len()).collect();
    loop {
        let (_, v) = linalg::min_eigenpair(&submatrix(&matrix.entries, &idx));
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()));
        let mut removed = false;
        for k in order {
            if idx.len() <= 1 {
                break;
            }
            let mut trial = idx.clone();
            trial.remove(k);
            let (l, _) = linalg::min_eigenpair(&submatrix(&matrix.entries, &trial));
            if l < keep_below {
                idx = trial;
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    let (l, v) = linalg::min_eigenpair(&submatrix(&matrix.entries, &idx));
    Witness {
        points: idx.iter().map(|&i| matrix.points[i]).collect(),
        indices: idx,
        min_eigenvalue: l,
        eigenvector: v.iter().copied().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub n_points: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            n_points: 30,
            n_trials: 20,
            seed: 7,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Worst report of a scan together with the Pick matrix it came from.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub report: PickReport,
    pub worst: PickMatrix,
}

/// Runs [`build_pick`] and [`psd_test`] on `n_trials` sampled point sets and
/// keeps the trial with the smallest `λ_min` relative to its threshold.
pub fn cnp_scan(
    symbol: &PowerSeriesSymbol,
    alpha: WeightParameter,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    if opts.n_points < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", opts.n_points)));
    }
    if opts.n_trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if symbol.is_constant() {
        return Err(Error::InvalidArgument("CNP scans need a non-constant symbol".into()));
    }
    let outcomes: Vec<Result<(PickMatrix, PickReport)>> = (0..opts.n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(opts.seed, t as u64);
            let points = hyperbolic_sample(opts.n_points, alpha, &mut rng)?;
            let m = build_pick(symbol, alpha, &points)?;
            let r = psd_test(&m, opts.tolerance)?;
            Ok((m, r))
        })
        .collect();
    let mut hazards = Vec::new();
    let mut lambdas = Vec::new();
    let mut worst: Option<(usize, PickMatrix, PickReport)> = None;
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((m, r)) => {
                lambdas.push(r.min_eigenvalue);
                let score = r.min_eigenvalue / r.threshold;
                let better = worst
                    .as_ref()
                    .is_none_or(|(_, _, w)| score < w.min_eigenvalue / w.threshold);
                if better {
                    worst = Some((t, m, r));
                }
            }
            Err(e @ Error::DivisionHazard { .. }) => hazards.push(format!("trial {t}: {e}")),
            Err(e) => return Err(e),
        }
    }
    let (t, matrix, mut report) = worst.ok_or_else(|| {
        Error::NoConvergence(format!("every trial hit a division hazard: {}", hazards.join("; ")))
    })?;
    report.trials = opts.n_trials;
    report.sampler_seed = Some(opts.seed);
    report.worst_trial = Some(t);
    report.trial_min_eigenvalues = lambdas;
    report.hazards = hazards;
    Ok(ScanResult { report, worst: matrix })
}

/// Writes the sampled points and the full Pick matrix, one row per point:
/// `index,z_re,z_im,in_witness,m0_re,m0_im,..`.
pub fn write_witness_csv<W: Write>(matrix: &PickMatrix, witness: Option<&Witness>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = matrix.len();
    let mut header = vec!["index".to_string(), "z_re".into(), "z_im".into(), "in_witness".into()];
    header.extend((0..n).flat_map(|j| [format!("m{j}_re"), format!("m{j}_im")]));
    w.write_record(&header)?;
    for i in 0..n {
        let z = matrix.points[i].value();
        let inside = witness.is_some_and(|wt| wt.indices.contains(&i));
        let mut row = vec![i.to_string(), z.re.to_string(), z.im.to_string(), u8::from(inside).to_string()];
        row.extend((0..n).flat_map(|j| {
            let m = matrix.entries[(i, j)];
            [m.re.to_string(), m.im.to_string()]
        }));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("flush", "<witness csv>", e))?;
    Ok(())
}

/// Contents of a witness CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessFile {
    pub points: Vec<DiskPoint>,
    pub in_witness: Vec<bool>,
    pub entries: CMatrix,
}

impl WitnessFile {
    /// Principal submatrix on the flagged points.
    pub fn witness_matrix(&self) -> CMatrix {
        let idx: Vec<usize> = (0..self.points.len()).filter(|&i| self.in_witness[i]).collect();
        submatrix(&self.entries, &idx)
    }

    pub fn witness_points(&self) -> Vec<DiskPoint> {
        self.points
            .iter()
            .zip(&self.in_witness)
            .filter_map(|(p, &f)| f.then_some(*p))
            .collect()
    }
}

pub fn read_witness_csv<R: Read>(input: R) -> Result<WitnessFile> {
    let mut r = csv::Reader::from_reader(input);
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number '{t}' in witness csv")))
    };
    let mut points = Vec::new();
    let mut flags = Vec::new();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() < 4 || (rec.len() - 4) % 2 != 0 {
            return Err(Error::Parse("malformed witness csv row".into()));
        }
        points.push(DiskPoint::new(Complex64::new(num(&rec[1])?, num(&rec[2])?))?);
        flags.push(&rec[3] == "1");
        let vals = (4..rec.len()).map(|k| num(&rec[k])).collect::<Result<Vec<f64>>>()?;
        rows.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("witness csv matrix is not square".into()));
    }
    Ok(WitnessFile {
        points,
        in_witness: flags,
        entries: CMatrix::from_fn(n, n, |i, j| rows[i][j]),
    })
}

/// `λ_min` of a witness submatrix by the Jacobi reference solver.
pub fn reverify_min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (values, _) = linalg::jacobi_eigen(m, 1e-14, 100)?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

/// The points as a column `v`; `v v*` is the Pick matrix of `φ(z) = z` at `α = 0`.
pub fn rank_one_vector(points: &[DiskPoint]) -> DVector<Complex64> {
    DVector::from_iterator(points.len(), points.iter().map(|p| p.value()))
}
