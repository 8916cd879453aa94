//! One routine per [`CheckId`], evaluated on a single (alpha, symbol) cell.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::config::Config;
use super::report::Status;
use super::scenario::CheckId;
use crate::cnp::{cnp_scan, reverify_min_eigenvalue, ScanOptions, Verdict};
use crate::kernels::rescaling_check;
use crate::linalg;
use crate::operators::{berezin, defect_matrix, inclusion_eigenvalues, spectrum, DefectSide};
use crate::sampler::trial_rng;
use crate::scalars::{basis_weights, WeightParameter};
use crate::symbols::{PowerSeriesSymbol, SymbolSpec};
use crate::{DiskPoint, Error, Result};

/// Stream offsets so that each check draws from its own random sequence.
const BEREZIN_STREAM: u64 = 1 << 20;
const RESCALING_STREAM: u64 = 2 << 20;

/// Status and metrics of one evaluated cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CellOutcome {
    fn new() -> Self {
        CellOutcome {
            status: Status::Pass,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn skip(code: &str, reason: impl Into<String>) -> Self {
        CellOutcome {
            status: Status::Skipped {
                code: code.to_string(),
                reason: reason.into(),
            },
            ..CellOutcome::new()
        }
    }

    /// Records a metric; non-finite values go to the notes because JSON
    /// cannot carry them.
    fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(name.to_string(), value);
        } else {
            self.notes.push(format!("{name} = {value}"));
        }
    }

    fn verdict(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }
}

/// Evaluates one cell. Numerical errors become failures with a note; only
/// precondition violations produce skips.
pub fn run_cell(
    check: CheckId,
    alpha: Option<WeightParameter>,
    symbol: Option<&SymbolSpec>,
    cfg: &Config,
) -> CellOutcome {
    let resolved = match (symbol, alpha) {
        (Some(s), Some(a)) => match s.resolve(a) {
            Ok(r) => Some(r),
            Err(e) => return CellOutcome::skip("symbol_unresolved", e.to_string()),
        },
        (Some(s), None) => Some(s.clone()),
        (None, _) => None,
    };
    let result = match (check, alpha, symbol, resolved.as_ref()) {
        (CheckId::CnpMoebiusPass, Some(a), Some(orig), Some(s)) => cnp_positive(a, orig, s, cfg),
        (CheckId::CnpNonmoebiusFail, Some(a), _, Some(s)) => cnp_negative(a, s, cfg),
        (CheckId::BerezinIdentity, Some(a), _, Some(s)) => berezin_identity(a, s, cfg),
        (CheckId::BlaschkeDecay, Some(a), _, Some(s)) => blaschke_decay(a, s, cfg),
        (CheckId::SingularNoncompact, Some(a), _, Some(s)) => compactness(a, s, cfg),
        (CheckId::RescalingIdentity, Some(a), _, Some(s)) => rescaling(a, s, cfg),
        (CheckId::HardyDegenerate, Some(a), _, Some(s)) => hardy(a, s, cfg),
        (CheckId::Lemma11Ratio, _, _, Some(s)) => ratio(s, cfg),
        (CheckId::InclusionAsymptote, Some(a), _, _) => inclusion(a, cfg),
        _ => Err(Error::Config(format!("check {check} is missing its alpha or symbol"))),
    };
    result.unwrap_or_else(|e| {
        let mut out = CellOutcome::new().verdict(false);
        out.notes.push(format!("error: {e}"));
        out
    })
}

/// Series used by the harness: singular inner symbols get `singular_length`
/// terms, other infinite series `series_length`, polynomials stay exact.
pub fn harness_series(spec: &SymbolSpec, cfg: &Config) -> Result<PowerSeriesSymbol> {
    match spec {
        SymbolSpec::SingularInner(_) => spec.to_series(cfg.singular_length),
        SymbolSpec::Mobius(_) | SymbolSpec::Blaschke(_) => spec.to_series(cfg.series_length),
        SymbolSpec::Monomial(_) | SymbolSpec::Series(_) => spec.default_series(),
    }
}

fn scan_options(cfg: &Config) -> ScanOptions {
    ScanOptions {
        n_points: cfg.cnp_points,
        n_trials: cfg.cnp_trials,
        seed: cfg.seed,
        tolerance: cfg.cnp_tol,
    }
}

fn in_cnp_range(a: f64) -> bool {
    a > -1.0 && a <= 0.0
}

/// Runs the sampled admissibility test and returns a skip when it fails.
fn require_admissible(
    series: &PowerSeriesSymbol,
    alpha: WeightParameter,
    cfg: &Config,
    out: &mut CellOutcome,
) -> Result<Option<CellOutcome>> {
    let adm = series.admissibility_check(alpha, cfg.admissibility_grid)?;
    out.metric("admissibility_sup", adm.sup_estimate);
    if let Some(l) = adm.pick_min_eigenvalue {
        out.metric("admissibility_pick_min_eigenvalue", l);
    }
    if adm.admissible {
        Ok(None)
    } else {
        Ok(Some(CellOutcome::skip(
            "symbol_inadmissible",
            format!(
                "symbol failed the sampled admissibility test (witness {})",
                adm.witness.unwrap_or_default()
            ),
        )))
    }
}

fn cnp_positive(alpha: WeightParameter, orig: &SymbolSpec, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    let a = alpha.value();
    let monomial_example = matches!(orig, SymbolSpec::Monomial(m) if m.scale().is_none());
    if monomial_example {
        if !(a < -1.0) {
            return Ok(CellOutcome::skip(
                "alpha_out_of_range",
                "the monomial CNP example is defined for -2 < alpha < -1",
            ));
        }
    } else if !in_cnp_range(a) {
        return Ok(CellOutcome::skip(
            "alpha_out_of_range",
            format!("alpha = {a} is outside (-1, 0], where Möbius symbols are known to give CNP kernels"),
        ));
    } else if !s.is_mobius() {
        return Ok(CellOutcome::skip(
            "symbol_kind",
            "positive CNP direction is only asserted for Möbius symbols",
        ));
    }
    let series = harness_series(s, cfg)?;
    let mut out = CellOutcome::new();
    if let Some(skip) = require_admissible(&series, alpha, cfg, &mut out)? {
        return Ok(skip);
    }
    let scan = cnp_scan(&series, alpha, &scan_options(cfg))?;
    let r = &scan.report;
    out.metric("min_eigenvalue", r.min_eigenvalue);
    out.metric("threshold", r.threshold);
    out.metric("trials", r.trials as f64);
    out.metric("completed_trials", r.trial_min_eigenvalues.len() as f64);
    out.notes.extend(r.hazards.iter().cloned());
    let ok = r.verdict == Verdict::Pass && r.trial_min_eigenvalues.len() == r.trials;
    Ok(out.verdict(ok))
}

fn cnp_negative(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    let a = alpha.value();
    let mobius = s.is_mobius();
    if a <= -1.0 {
        return Ok(CellOutcome::skip(
            "alpha_out_of_range",
            format!("alpha = {a} <= -1: non-Möbius CNP kernels exist there"),
        ));
    }
    if in_cnp_range(a) && mobius {
        return Ok(CellOutcome::skip("symbol_kind", "Möbius symbols give CNP kernels for -1 < alpha <= 0"));
    }
    if a > 0.0 && !mobius {
        return Ok(CellOutcome::skip(
            "open_question",
            "for alpha > 0 no CNP characterization is known beyond Möbius symbols failing",
        ));
    }
    let series = harness_series(s, cfg)?;
    let mut out = CellOutcome::new();
    if let Some(skip) = require_admissible(&series, alpha, cfg, &mut out)? {
        return Ok(skip);
    }
    let scan = cnp_scan(&series, alpha, &scan_options(cfg))?;
    let r = &scan.report;
    out.metric("min_eigenvalue", r.min_eigenvalue);
    out.metric("threshold", r.threshold);
    out.metric(
        "failing_trials",
        r.trial_min_eigenvalues.iter().filter(|&&l| l < -cfg.fail_threshold).count() as f64,
    );
    if let Some(t) = r.worst_trial {
        out.metric("worst_trial", t as f64);
    }
    out.notes.extend(r.hazards.iter().cloned());
    let mut ok = r.verdict == Verdict::Fail && r.min_eigenvalue < -cfg.fail_threshold;
    if let Some(w) = &r.witness {
        let idx = &w.indices;
        let sub = linalg::CMatrix::from_fn(idx.len(), idx.len(), |i, j| scan.worst.entries[(idx[i], idx[j])]);
        let jacobi = reverify_min_eigenvalue(&sub)?;
        out.metric("witness_size", idx.len() as f64);
        out.metric("witness_min_eigenvalue", w.min_eigenvalue);
        out.metric("witness_jacobi_min_eigenvalue", jacobi);
        ok &= jacobi < -cfg.fail_threshold;
    } else {
        ok = false;
    }
    Ok(out.verdict(ok))
}

fn require_above_minus_one(alpha: WeightParameter) -> Option<CellOutcome> {
    (alpha.value() <= -1.0).then(|| {
        CellOutcome::skip(
            "alpha_out_of_range",
            format!("alpha = {} <= -1: defect operator checks need alpha > -1", alpha.value()),
        )
    })
}

fn berezin_identity(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    if let Some(skip) = require_above_minus_one(alpha) {
        return Ok(skip);
    }
    let series = harness_series(s, cfg)?;
    let e = defect_matrix(&series, alpha, cfg.size, DefectSide::Phi)?;
    let mut rng = trial_rng(cfg.seed, BEREZIN_STREAM);
    let mut worst = 0.0_f64;
    for _ in 0..cfg.berezin_points {
        let r = cfg.berezin_max_radius * rng.random::<f64>().sqrt();
        let a = DiskPoint::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)?;
        let want = 1.0 - s.eval_closed(a.value())?.norm_sqr();
        worst = worst.max((berezin(&e, a)? - want).abs());
    }
    let mut out = CellOutcome::new();
    out.metric("max_residual", worst);
    Ok(out.verdict(worst < cfg.berezin_tol))
}

fn blaschke_decay(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    if let Some(skip) = require_above_minus_one(alpha) {
        return Ok(skip);
    }
    let Some(degree) = s.blaschke_degree() else {
        return Ok(CellOutcome::skip("symbol_kind", "decay is asserted for finite Blaschke products only"));
    };
    let series = harness_series(s, cfg)?;
    let mut out = CellOutcome::new();
    out.metric("degree", degree as f64);
    let mut ok = true;
    for (side, name) in [(DefectSide::Phi, "phi"), (DefectSide::Conj, "conj")] {
        let e = defect_matrix(&series, alpha, cfg.size, side)?;
        let report = spectrum(&e, cfg.window)?;
        out.metric(&format!("decay_exponent_{name}"), report.decay_exponent);
        out.metric(&format!("top_eigenvalue_{name}"), report.eigenvalues[0]);
        ok &= (report.decay_exponent - cfg.decay_target).abs() <= cfg.decay_tol;
    }
    Ok(out.verdict(ok))
}

fn compactness(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    if let Some(skip) = require_above_minus_one(alpha) {
        return Ok(skip);
    }
    let expect_compact = if s.blaschke_degree().is_some() {
        true
    } else if s.is_singular_inner() {
        false
    } else {
        return Ok(CellOutcome::skip(
            "symbol_kind",
            "boundary Berezin behaviour is asserted for finite Blaschke and singular inner symbols",
        ));
    };
    let series = harness_series(s, cfg)?;
    let e = defect_matrix(&series, alpha, cfg.berezin_size, DefectSide::Phi)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_dir = 0;
    for k in 0..cfg.directions {
        let theta = std::f64::consts::TAU * k as f64 / cfg.directions as f64;
        let v = berezin(&e, DiskPoint::from_polar(cfg.berezin_radius, theta)?)?;
        if v > best {
            best = v;
            best_dir = k;
        }
    }
    let mut out = CellOutcome::new();
    out.metric("max_boundary_berezin", best);
    out.metric("argmax_direction", best_dir as f64);
    out.metric("expect_compact", f64::from(u8::from(expect_compact)));
    let ok = if expect_compact {
        best < cfg.compact_below
    } else {
        best >= cfg.noncompact_above
    };
    Ok(out.verdict(ok))
}

fn rescaling(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    let series = harness_series(s, cfg)?;
    if series.is_constant() {
        return Ok(CellOutcome::skip("symbol_kind", "rescaling needs a non-constant symbol"));
    }
    let mut rng = trial_rng(cfg.seed, RESCALING_STREAM);
    let points = (0..cfg.rescaling_points)
        .map(|_| {
            let r = cfg.rescaling_radius * rng.random::<f64>().sqrt();
            DiskPoint::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
        })
        .collect::<Result<Vec<_>>>()?;
    let residual = rescaling_check(&series, alpha, &points)?;
    let mut out = CellOutcome::new();
    out.metric("max_residual", residual);
    Ok(out.verdict(residual < cfg.rescaling_tol))
}

fn hardy(alpha: WeightParameter, s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    if alpha.value() != -1.0 {
        return Ok(CellOutcome::skip("alpha_out_of_range", "the Hardy-space case needs alpha = -1"));
    }
    if !s.is_rotation() {
        return Ok(CellOutcome::skip("symbol_kind", "the rank-one defect is asserted for phi(z) = zeta z"));
    }
    let series = harness_series(s, cfg)?;
    let conj = defect_matrix(&series, alpha, cfg.size, DefectSide::Conj)?;
    let phi = defect_matrix(&series, alpha, cfg.size, DefectSide::Phi)?;
    let conj_max = linalg::max_abs(&conj.entries);
    let ev = linalg::hermitian_eigenvalues(&phi.entries);
    let rank = ev.iter().filter(|&&l| l > 1e-10).count();
    let top = ev.last().copied().unwrap_or(0.0);
    let mut out = CellOutcome::new();
    out.metric("conj_max_abs", conj_max);
    out.metric("phi_rank", rank as f64);
    out.metric("phi_top_eigenvalue", top);
    Ok(out.verdict(conj_max < cfg.hardy_tol && rank == 1 && (top - 1.0).abs() < cfg.hardy_tol))
}

/// Extrema of `(1 - |φ(z)|²)/(1 - |z|²)` over the polar grid
/// `{r e^{2πik/directions}}`, from the closed form of the symbol.
pub fn lemma11_ratio_check(symbol: &SymbolSpec, radii: &[f64], directions: usize) -> Result<(f64, f64)> {
    if directions == 0 || radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidArgument("radii must lie in (0, 1) and directions be positive".into()));
    }
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for &r in radii {
        for k in 0..directions {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / directions as f64);
            let q = (1.0 - symbol.eval_closed(z)?.norm_sqr()) / (1.0 - r * r);
            sup = sup.max(q);
            inf = inf.min(q);
        }
    }
    Ok((sup, inf))
}

/// `|a|` when the symbol is a single Möbius factor.
fn mobius_center(s: &SymbolSpec) -> Option<f64> {
    match s {
        SymbolSpec::Mobius(m) => Some(m.a().norm()),
        SymbolSpec::Blaschke(b) if b.degree() == 1 => Some(b.zeros()[0].norm()),
        _ if s.is_rotation() => Some(0.0),
        _ => None,
    }
}

fn ratio(s: &SymbolSpec, cfg: &Config) -> Result<CellOutcome> {
    let mut out = CellOutcome::new();
    if s.is_singular_inner() {
        let r = cfg.singular_ratio_radius;
        let q = (1.0 - s.eval_closed(Complex64::new(r, 0.0))?.norm_sqr()) / (1.0 - r * r);
        out.metric("ratio_at_radius", q);
        let (sup, inf) = lemma11_ratio_check(s, &cfg.lemma11_radii, cfg.directions)?;
        out.metric("grid_sup", sup);
        out.metric("grid_inf", inf);
        return Ok(out.verdict(q > cfg.singular_ratio_min));
    }
    if s.blaschke_degree().is_none() {
        return Ok(CellOutcome::skip(
            "symbol_kind",
            "ratio bounds are asserted for finite Blaschke and singular inner symbols",
        ));
    }
    let (sup, inf) = lemma11_ratio_check(s, &cfg.lemma11_radii, cfg.directions)?;
    out.metric("sup", sup);
    out.metric("inf", inf);
    let mut ok = inf > 0.0 && sup.is_finite();
    if let Some(m) = mobius_center(s) {
        let (hi, lo) = ((1.0 + m) / (1.0 - m), (1.0 - m) / (1.0 + m));
        out.metric("expected_sup", hi);
        out.metric("expected_inf", lo);
        ok &= (sup - hi).abs() <= cfg.lemma11_rel_tol * hi && (inf - lo).abs() <= cfg.lemma11_rel_tol * lo;
    }
    Ok(out.verdict(ok))
}

fn inclusion(alpha: WeightParameter, cfg: &Config) -> Result<CellOutcome> {
    let gamma = alpha.value() - cfg.inclusion_gap;
    if gamma <= -2.0 {
        return Ok(CellOutcome::skip(
            "alpha_out_of_range",
            format!("gamma = alpha - {} = {gamma} must exceed -2", cfg.inclusion_gap),
        ));
    }
    let n = cfg.inclusion_size;
    let eig = inclusion_eigenvalues(alpha, gamma, n)?;
    // independent oracle: ratio of the two weight sequences
    let wg = basis_weights(WeightParameter::new(gamma)?, n);
    let wa = basis_weights(alpha, n);
    let mut deviation = 0.0_f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &x) in eig.iter().enumerate() {
        let oracle = wg.get(k) / wa.get(k);
        deviation = deviation.max((x - oracle).abs() / oracle);
        if k >= cfg.inclusion_from {
            let scaled = x * ((k + 1) as f64).powf(cfg.inclusion_gap);
            lo = lo.min(scaled);
            hi = hi.max(scaled);
        }
    }
    let mut out = CellOutcome::new();
    out.metric("gamma", gamma);
    out.metric("relative_deviation", deviation);
    out.metric("scaled_min", lo);
    out.metric("scaled_max", hi);
    Ok(out.verdict(deviation < 1e-12 && lo >= 0.25 && hi <= 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(a: f64) -> Option<WeightParameter> {
        Some(WeightParameter::new(a).unwrap())
    }

    fn sym(text: &str) -> SymbolSpec {
        text.parse().unwrap()
    }

    #[test]
    fn lemma11_examples() {
        let (sup, inf) = lemma11_ratio_check(&SymbolSpec::identity(), &[0.5, 0.9], 8).unwrap();
        assert!((sup - 1.0).abs() < 1e-12 && (inf - 1.0).abs() < 1e-12);
        let (sup, inf) = lemma11_ratio_check(&sym("mobius a=0.5"), &[0.5, 0.9, 0.99], 16).unwrap();
        assert!(sup <= 3.0 && inf >= 1.0 / 3.0);
        let cfg = Config::default();
        let out = run_cell(CheckId::Lemma11Ratio, None, Some(&sym("singular c=1")), &cfg);
        assert_eq!(out.status, Status::Pass);
        assert!(out.metrics["ratio_at_radius"] > 50.0);
    }

    #[test]
    fn gates_skip_with_reasons() {
        let cfg = Config::default();
        let out = run_cell(CheckId::CnpMoebiusPass, alpha(0.5), Some(&sym("blaschke zeros=0.5,-0.5")), &cfg);
        assert!(matches!(out.status, Status::Skipped { ref code, .. } if code == "alpha_out_of_range"));
        let out = run_cell(CheckId::HardyDegenerate, alpha(0.0), Some(&SymbolSpec::identity()), &cfg);
        assert!(matches!(out.status, Status::Skipped { .. }));
        let out = run_cell(CheckId::BerezinIdentity, alpha(0.0), Some(&sym("monomial n=2")), &cfg);
        assert!(matches!(out.status, Status::Skipped { ref code, .. } if code == "symbol_unresolved"));
        let out = run_cell(CheckId::InclusionAsymptote, alpha(-1.5), None, &cfg);
        assert!(matches!(out.status, Status::Skipped { .. }));
    }

    #[test]
    fn hardy_and_inclusion_pass() {
        let cfg = Config::default();
        let out = run_cell(CheckId::HardyDegenerate, alpha(-1.0), Some(&SymbolSpec::identity()), &cfg);
        assert_eq!(out.status, Status::Pass, "{out:?}");
        let out = run_cell(CheckId::InclusionAsymptote, alpha(0.5), None, &cfg);
        assert_eq!(out.status, Status::Pass, "{out:?}");
    }

    #[test]
    fn mobius_cnp_cell_passes() {
        let cfg = Config::default();
        let out = run_cell(CheckId::CnpMoebiusPass, alpha(0.0), Some(&sym("mobius a=0.5")), &cfg);
        assert_eq!(out.status, Status::Pass, "{out:?}");
    }
}
