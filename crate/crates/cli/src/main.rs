use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use subbergman::cnp::write_witness_csv;
use subbergman::harness::checks::harness_series;
use subbergman::harness::{self, emit_report, Config, ReportFormat, Status};
use subbergman::kernels::KernelEvaluator;
use subbergman::linalg;
use subbergman::{
    berezin, cnp_scan, defect_matrix, parse_complex, spectrum, toeplitz_matrix, Complex64,
    DefectSide, DiskPoint, FitWindow, KernelKind, KernelSpec, PowerSeriesSymbol, ScanOptions,
    SymbolSpec, WeightParameter,
};

#[derive(Parser)]
#[command(name = "subbergman", version, about = "Sub-Bergman kernels, defect operators and Pick tests")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a reproducing kernel.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Complete Nevanlinna-Pick tests.
    Cnp {
        #[command(subcommand)]
        action: CnpAction,
    },
    /// Truncated Toeplitz matrices.
    Toeplitz {
        #[command(subcommand)]
        action: ToeplitzAction,
    },
    /// Defect operator spectra.
    Defect {
        #[command(subcommand)]
        action: DefectAction,
    },
    /// Berezin transform of E_phi at one or more points.
    Berezin(BerezinArgs),
    /// Run a scenario file, or the bundled suite with `all`.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SymbolArgs {
    /// Weight parameter alpha > -2.
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Symbol, e.g. "mobius a=0.5", "blaschke zeros=0.5,-0.5", "singular c=1".
    #[arg(long)]
    symbol: String,
}

impl SymbolArgs {
    fn load(&self) -> Result<(WeightParameter, SymbolSpec, PowerSeriesSymbol)> {
        let alpha = WeightParameter::new(self.alpha)?;
        let spec: SymbolSpec = self.symbol.parse()?;
        let spec = spec.resolve(alpha)?;
        let series = harness_series(&spec, &Config::default())?;
        Ok((alpha, spec, series))
    }
}

#[derive(Subcommand)]
enum KernelAction {
    /// Print K(z, w), or process a CSV of point pairs with --batch.
    Eval {
        #[arg(long, default_value = "bergman")]
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        symbol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// CSV with columns `z,w` (complex text) or `z_re,z_im,w_re,w_im`.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Output for --batch (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CnpAction {
    /// Randomized Pick-matrix scan.
    Test {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 30)]
        points: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Report path; a failing scan also writes witness.csv next to it.
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ToeplitzAction {
    /// Write the N x N matrix of T_phi as CSV.
    Build {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 400)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DefectAction {
    /// Eigenvalues, decay fit and Schatten sums of E_phi or E_phi-bar.
    Spectrum {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value = "phi")]
        which: String,
        #[arg(long, default_value_t = 400)]
        size: usize,
        #[arg(long, default_value = "20:200")]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the matrix as CSV.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BerezinArgs {
    #[command(flatten)]
    symbol: SymbolArgs,
    #[arg(long, default_value_t = 400)]
    size: usize,
    /// Evaluation point; repeat for several.
    #[arg(long = "a", required = true, allow_hyphen_values = true)]
    points: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario JSON file, or `all` for the bundled suite.
    target: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set size=200 (wins over --config).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "verify-out")]
    out: PathBuf,
}

fn sig15(x: f64) -> String {
    // x + 0.0 turns -0.0 into 0.0
    format!("{:.14e}", x + 0.0)
}

fn point(text: &str) -> Result<DiskPoint> {
    Ok(DiskPoint::new(parse_complex(text)?)?)
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = writer(Some(path))?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn kernel_eval(
    kind: &str,
    alpha: f64,
    symbol: Option<&str>,
    z: Option<&str>,
    w: Option<&str>,
    batch: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let kind: KernelKind = kind.parse()?;
    let alpha = WeightParameter::new(alpha)?;
    let series = match symbol {
        Some(text) => {
            let spec: SymbolSpec = text.parse()?;
            Some(harness_series(&spec.resolve(alpha)?, &Config::default())?)
        }
        None => None,
    };
    let eval = KernelEvaluator::new(KernelSpec { kind, alpha, symbol: series })?;
    if let Some(path) = batch {
        let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let headers = rd.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let split = (col("z_re"), col("z_im"), col("w_re"), col("w_im"));
        let joined = (col("z"), col("w"));
        let mut wr = csv::Writer::from_writer(writer(out)?);
        let mut header: Vec<String> = headers.iter().map(str::to_string).collect();
        header.extend(["k_re".to_string(), "k_im".to_string()]);
        wr.write_record(&header)?;
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].trim().parse().with_context(|| format!("row {}: bad number '{}'", line + 1, &rec[i]))
            };
            let (zp, wp) = match (split, joined) {
                ((Some(a), Some(b), Some(c), Some(d)), _) => (
                    DiskPoint::new(Complex64::new(num(a)?, num(b)?))?,
                    DiskPoint::new(Complex64::new(num(c)?, num(d)?))?,
                ),
                (_, (Some(a), Some(b))) => (point(&rec[a])?, point(&rec[b])?),
                _ => bail!("batch CSV needs columns z,w or z_re,z_im,w_re,w_im"),
            };
            let k = eval.eval(zp, wp)?;
            let mut row: Vec<String> = rec.iter().map(str::to_string).collect();
            row.extend([sig15(k.re), sig15(k.im)]);
            wr.write_record(&row)?;
        }
        wr.flush()?;
        return Ok(());
    }
    let (Some(z), Some(w)) = (z, w) else {
        bail!("give --z and --w, or --batch");
    };
    let k = eval.eval(point(z)?, point(w)?)?;
    println!("re {}", sig15(k.re));
    println!("im {}", sig15(k.im));
    Ok(())
}

fn cnp_test(args: &SymbolArgs, opts: ScanOptions, out: &Path) -> Result<()> {
    let (alpha, spec, series) = args.load()?;
    let adm = series.admissibility_check(alpha, 64)?;
    if !adm.admissible {
        eprintln!(
            "warning: symbol failed the sampled admissibility test (sup {:.6}, witness {})",
            adm.sup_estimate,
            adm.witness.as_deref().unwrap_or("-")
        );
    }
    let scan = cnp_scan(&series, alpha, &opts)?;
    let r = &scan.report;
    let report = json!({
        "alpha": alpha.value(),
        "symbol": spec.to_string(),
        "points": opts.n_points,
        "admissibility": adm,
        "report": r,
    });
    write_json(out, &report)?;
    println!(
        "{}  lambda_min = {}  threshold = {}  trials = {}  seed = {}",
        r.verdict,
        sig15(r.min_eigenvalue),
        sig15(r.threshold),
        r.trials,
        opts.seed
    );
    if let Some(w) = &r.witness {
        let path = out.parent().unwrap_or(Path::new(".")).join("witness.csv");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_witness_csv(&scan.worst, Some(w), BufWriter::new(file))?;
        println!(
            "witness: {} points, lambda_min = {}, written to {}",
            w.indices.len(),
            sig15(w.min_eigenvalue),
            path.display()
        );
    } else {
        println!("pass is evidence only: no finite sample certifies the CNP property");
    }
    Ok(())
}

fn toeplitz_build(args: &SymbolArgs, size: usize, out: Option<&Path>) -> Result<()> {
    let (alpha, _, series) = args.load()?;
    let t = toeplitz_matrix(&series, alpha, size)?;
    linalg::write_csv(&t.entries, writer(out)?)?;
    Ok(())
}

fn defect_spectrum(
    args: &SymbolArgs,
    which: &str,
    size: usize,
    window: &str,
    out: Option<&Path>,
    matrix_out: Option<&Path>,
) -> Result<()> {
    let (alpha, spec, series) = args.load()?;
    let side: DefectSide = which.parse()?;
    let window: FitWindow = window.parse()?;
    let e = defect_matrix(&series, alpha, size, side)?;
    if let Some(p) = matrix_out {
        linalg::write_csv(&e.entries, writer(Some(p))?)?;
    }
    let r = spectrum(&e, window)?;
    let report = json!({
        "alpha": alpha.value(),
        "symbol": spec.to_string(),
        "which": which,
        "size": size,
        "eigenvalues": r.eigenvalues,
        "usable": r.usable,
        "decay_exponent": r.decay_exponent,
        "window": r.window.to_string(),
        "schatten": r.schatten,
    });
    match out {
        Some(p) => {
            write_json(p, &report)?;
            println!("decay_exponent {}  (window {}, N = {size})", sig15(r.decay_exponent), r.window);
            for s in &r.schatten {
                let flag = if s.tail_converged { "" } else { "  tail not converged" };
                println!("schatten p={}  {}{flag}", s.p, sig15(s.partial_norm));
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn berezin_cmd(args: &BerezinArgs) -> Result<()> {
    let (alpha, spec, series) = args.symbol.load()?;
    let e = defect_matrix(&series, alpha, args.size, DefectSide::Phi)?;
    println!("a,berezin,one_minus_abs_phi_sq");
    for text in &args.points {
        let a = point(text)?;
        let b = berezin(&e, a)?;
        let closed = 1.0 - spec.eval_closed(a.value())?.norm_sqr();
        println!("{a},{},{}", sig15(b), sig15(closed));
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        cfg.set(k, v)?;
    }
    let scenarios = if args.target == "all" {
        harness::verify_all()
    } else {
        harness::load_scenarios(Path::new(&args.target))?
    };
    let report = harness::run_scenarios(&scenarios, &cfg)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    emit_report(&report, &args.out.join("report.json"), ReportFormat::Json)?;
    emit_report(&report, &args.out.join("report.csv"), ReportFormat::Csv)?;
    for c in &report.checks {
        let alpha = c.alpha.map_or("-".to_string(), |a| a.to_string());
        let symbol = c.symbol.as_deref().unwrap_or("-");
        let tail = match &c.status {
            Status::Skipped { code, .. } => format!(" ({code})"),
            _ => String::new(),
        };
        println!(
            "{:<7} {:<20} {:<20} alpha={alpha:<5} {symbol}{tail}",
            c.status.label(),
            c.scenario,
            c.check.name()
        );
        for note in &c.notes {
            println!("        note: {note}");
        }
    }
    let s = report.summary;
    println!(
        "{} passed, {} failed, {} skipped in {:.1}s; report in {}",
        s.pass,
        s.fail,
        s.skipped,
        report.elapsed_seconds,
        args.out.display()
    );
    Ok(!report.failed())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Kernel {
            action: KernelAction::Eval { kind, alpha, symbol, z, w, batch, out },
        } => kernel_eval(
            &kind,
            alpha,
            symbol.as_deref(),
            z.as_deref(),
            w.as_deref(),
            batch.as_deref(),
            out.as_deref(),
        )?,
        Command::Cnp {
            action: CnpAction::Test { symbol, points, trials, seed, tol, out },
        } => cnp_test(
            &symbol,
            ScanOptions {
                n_points: points,
                n_trials: trials,
                seed,
                tolerance: tol,
            },
            &out,
        )?,
        Command::Toeplitz {
            action: ToeplitzAction::Build { symbol, size, out },
        } => toeplitz_build(&symbol, size, out.as_deref())?,
        Command::Defect {
            action: DefectAction::Spectrum { symbol, which, size, window, out, matrix_out },
        } => defect_spectrum(&symbol, &which, size, &window, out.as_deref(), matrix_out.as_deref())?,
        Command::Berezin(args) => berezin_cmd(&args)?,
        Command::Verify(args) => return verify(&args),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
