//! Command-line frontend. Single results are JSON on stdout, grids are CSV.
//! Floats are written with 17 significant digits so reruns can be compared
//! byte for byte. Exit codes: 0 success, 1 computational failure, 2 usage
//! error; failures also print a JSON object on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::calibration::{
    calibrate_closed_form, calibrate_gaussian_asymptotic, calibrate_mc, CalibrationResult, DEFAULT_ALPHA, DEFAULT_GAUSS_DRAWS, DEFAULT_MC_DRAWS,
};
use crate::error::PicError;
use crate::experiments::{
    poisson_pivot_demo_with, run_null_coverage_with, run_phase_with, CalibrationMode, DemoConfig,
    Method, NullCoverageConfig, NullSelector, PhaseCurve, PhaseGrid, PHASE_CSV_HEADER,
};
use crate::format::fmt_f64;
use crate::losses::CompositeLoss;
use crate::model::{gaussian_design, read_csv, read_design_csv, Dataset, FamilySpec, FitResult, PenaltySpec};
use crate::rng;
use crate::solver::{fit_pic, refit_support, SolverConfig};
use crate::subset::{
    forward_path, pic_l0_lambda, select_ic, Criterion, L0Mode, DEFAULT_EBIC_GAMMA, DEFAULT_FOLDS,
};

#[derive(Debug, Parser)]
#[command(name = "pic", version, about = "Sparse regression with pivotal, pre-set penalty levels")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, env = "PIC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Penalty level at the detection boundary.
    Calibrate(CalibrateArgs),
    /// Penalized fit of a CSV dataset.
    Fit(FitArgs),
    /// Forward selection scored by an information criterion.
    SelectL0(SelectL0Args),
    /// Exact-support-recovery phase transition grid.
    SimulatePhase(PhaseArgs),
    /// Empty-model rate of a selector on pure-noise data.
    NullCoverage(NullArgs),
    /// Poisson gradients under the pivotal and canonical transformation pairs.
    DemoPoisson(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalMethod {
    Mc,
    Gauss,
    Closed,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_enum, default_value = "mc")]
    pub method: CalMethod,
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// Design CSV with a header row; every column is a predictor.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Rows of a synthetic Gaussian design (or the closed-form rule).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Monte Carlo draws (default 1000 for mc, 10000 for gauss).
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    L1,
    Scad,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, value_enum, default_value = "l1")]
    pub penalty: PenaltyArg,
    #[arg(long, default_value_t = PenaltySpec::DEFAULT_SCAD_A)]
    pub scad_a: f64,
    /// Fixed penalty level; calibrated from `--alpha` when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "mc")]
    pub calibration: CalMethod,
    #[arg(long)]
    pub draws: Option<usize>,
    /// Also report the unpenalized refit on the selected support.
    #[arg(long)]
    pub refit: bool,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    PivotalBic,
    Bic,
    Ebic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum L0ModeArg {
    Forward,
    BestSubset,
}

#[derive(Debug, Args)]
pub struct SelectL0Args {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, value_enum, default_value = "pivotal-bic")]
    pub criterion: CriterionArg,
    /// Statistic used to calibrate the pivotal criterion.
    #[arg(long, value_enum, default_value = "forward")]
    pub mode: L0ModeArg,
    #[arg(long, default_value_t = DEFAULT_EBIC_GAMMA)]
    pub gamma: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub draws: usize,
    /// Longest path considered (default min(p, n - 2)).
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseCalibration {
    Mc,
    Gauss,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// Sample sizes, comma separated.
    #[arg(long, default_value = "200")]
    pub n: String,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Sparsity levels: `start:end:step` (inclusive) or a comma list.
    /// Defaults to 0..=min(p, n/2).
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value = "pic-l1,pic-scad")]
    pub methods: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "mc")]
    pub calibration: PhaseCalibration,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    /// Output CSV; `-` writes it to stdout instead of the summary table.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectorArg {
    PicL1,
    PicL0,
}

#[derive(Debug, Args)]
pub struct NullArgs {
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "pic-l1")]
    pub selector: SelectorArg,
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub draws: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value = "36,4,144")]
    pub mu0: String,
    #[arg(long, default_value = "0,3,3")]
    pub s: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_GAUSS_DRAWS)]
    pub draws: usize,
    #[arg(long, default_value_t = 2000)]
    pub mc_draws: usize,
    #[arg(long, default_value = "-")]
    pub out: String,
}

/// Exit status of a command.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl From<PicError> for Failure {
    fn from(e: PicError) -> Self {
        match e {
            PicError::InvalidArgument(_)
            | PicError::Dimension(_)
            | PicError::NonFinite { .. }
            | PicError::ConstantColumn(_)
            | PicError::Csv(_)
            | PicError::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Compute(format!("io error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Compute(format!("csv error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
}

/// Compact JSON with every float in 17-significant-digit scientific notation.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    v.serialize(&mut ser).expect("output types always serialize");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn parse_family(s: &str) -> CliResult<FamilySpec> {
    Ok(s.parse::<FamilySpec>()?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().or_else(|_| usage(format!("bad {what} value '{t}'"))))
        .collect()
}

/// `start:end:step` (inclusive, step >= 1) or a comma list.
pub fn parse_range(s: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => parse_list(s, "s"),
        2 | 3 => {
            let num = |t: &str| t.trim().parse::<usize>().or_else(|_| usage(format!("bad range '{s}'")));
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
            if step == 0 || b < a {
                return usage(format!("bad range '{s}'"));
            }
            Ok((a..=b).step_by(step).collect())
        }
        _ => usage(format!("bad range '{s}'")),
    }
}

fn validate_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        usage(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// `-` means the command's own output stream.
fn open_out<'a>(path: &str, out: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    if path == "-" {
        Ok(Box::new(out))
    } else {
        let f = File::create(path).map_err(|e| Failure::Usage(format!("cannot create {path}: {e}")))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

#[derive(Serialize)]
struct CalibrationOut {
    lambda: f64,
    alpha: f64,
    method: &'static str,
    #[serde(rename = "M")]
    m: Option<usize>,
    seed: Option<u64>,
    family: String,
}

impl From<&CalibrationResult> for CalibrationOut {
    fn from(c: &CalibrationResult) -> Self {
        CalibrationOut {
            lambda: c.lambda,
            alpha: c.alpha,
            method: c.method.tag(),
            m: c.method.draws(),
            seed: c.method.seed(),
            family: c.family.to_string(),
        }
    }
}

fn calibrate_on(
    method: CalMethod,
    family: &FamilySpec,
    d: &Dataset,
    alpha: f64,
    draws: Option<usize>,
    seed: u64,
) -> CliResult<CalibrationResult> {
    Ok(match method {
        CalMethod::Mc => calibrate_mc(family, d, alpha, draws.unwrap_or(DEFAULT_MC_DRAWS), seed)?,
        CalMethod::Gauss => {
            calibrate_gaussian_asymptotic(family, d, alpha, draws.unwrap_or(DEFAULT_GAUSS_DRAWS), seed)?
        }
        CalMethod::Closed => {
            let mut c = calibrate_closed_form(d.n(), d.p(), alpha)?;
            c.family = *family;
            c
        }
    })
}

fn cmd_calibrate(a: &CalibrateArgs, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let family = parse_family(&a.family)?;
    validate_alpha(a.alpha)?;
    let res = match (a.method, &a.design, a.n, a.p) {
        (CalMethod::Closed, None, Some(n), Some(p)) => {
            let mut c = calibrate_closed_form(n, p, a.alpha)?;
            c.family = family;
            c
        }
        (method, Some(path), None, None) => {
            let d = read_design_csv(path)?;
            calibrate_on(method, &family, &d, a.alpha, a.draws, seed)?
        }
        (method, None, Some(n), Some(p)) => {
            if n < 2 || p < 1 {
                return usage("need n >= 2 and p >= 1");
            }
            let x = gaussian_design(&mut rng::stream(seed, &[rng::TAG_DESIGN]), n, p)?;
            let d = Dataset::from_standardized(x, DVector::zeros(n))?;
            calibrate_on(method, &family, &d, a.alpha, a.draws, seed)?
        }
        _ => return usage("give either --design or both --n and --p"),
    };
    writeln!(out, "{}", to_json(&CalibrationOut::from(&res)))?;
    Ok(())
}

#[derive(Serialize)]
struct Coefs {
    intercept: f64,
    coefficients: Vec<f64>,
}

fn coefs(d: &Dataset, beta0: f64, beta: &DVector<f64>) -> (Coefs, Coefs) {
    let (b0o, bo) = d.to_original_scale(beta0, beta);
    (
        Coefs { intercept: b0o, coefficients: bo.iter().copied().collect() },
        Coefs { intercept: beta0, coefficients: beta.iter().copied().collect() },
    )
}

#[derive(Serialize)]
struct RefitOut {
    original: Coefs,
    standardized: Coefs,
}

#[derive(Serialize)]
struct FitOut {
    family: String,
    penalty: String,
    lambda: f64,
    /// Null when the penalty level was given on the command line.
    calibration: Option<CalibrationOut>,
    support: Vec<usize>,
    support_names: Option<Vec<String>>,
    original: Coefs,
    standardized: Coefs,
    sigma_hat: Option<f64>,
    objective: f64,
    iterations: usize,
    converged: bool,
    exact_fit: bool,
    refit: Option<RefitOut>,
    warnings: Vec<String>,
}

fn support_names(d: &Dataset, support: &[usize]) -> Option<Vec<String>> {
    d.names().map(|names| support.iter().map(|&j| names[j].clone()).collect())
}

fn refit_out(d: &Dataset, fit: &FitResult) -> Option<RefitOut> {
    let (b0, b) = (fit.refit_beta0?, fit.refit_beta.as_ref()?);
    let (original, standardized) = coefs(d, b0, b);
    Some(RefitOut { original, standardized })
}

fn cmd_fit(a: &FitArgs, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let family = parse_family(&a.family)?;
    validate_alpha(a.alpha)?;
    let penalty = match a.penalty {
        PenaltyArg::L1 => PenaltySpec::L1,
        PenaltyArg::Scad => PenaltySpec::scad(a.scad_a)?,
    };
    if let Some(l) = a.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return usage(format!("lambda must be positive, got {l}"));
        }
    }
    let cfg = SolverConfig { max_iter: a.max_iter, tol: a.tol, ..SolverConfig::default() };
    cfg.validate()?;
    let d = read_csv(&a.data, &a.response)?;
    let cl = CompositeLoss::new(family);
    let (lambda, calibration) = match a.lambda {
        Some(l) => (l, None),
        None => {
            let c = calibrate_on(a.calibration, &family, &d, a.alpha, a.draws, seed)?;
            (c.lambda, Some(CalibrationOut::from(&c)))
        }
    };
    let mut fit = fit_pic(&cl, &penalty, lambda, &d, &cfg)?;
    if a.refit {
        let r = refit_support(&cl, &d, &fit.support_hat)?;
        fit.refit_beta0 = r.refit_beta0;
        fit.refit_beta = r.refit_beta;
        fit.warnings.extend(r.warnings);
    }
    let (original, standardized) = coefs(&d, fit.beta0_hat, &fit.beta_hat);
    let res = FitOut {
        family: family.to_string(),
        penalty: penalty.to_string(),
        lambda,
        calibration,
        support_names: support_names(&d, &fit.support_hat),
        support: fit.support_hat.clone(),
        original,
        standardized,
        sigma_hat: fit.sigma_hat,
        objective: fit.objective,
        iterations: fit.iterations,
        converged: fit.converged,
        exact_fit: fit.exact_fit,
        refit: refit_out(&d, &fit),
        warnings: fit.warnings.clone(),
    };
    writeln!(out, "{}", to_json(&res))?;
    Ok(())
}

#[derive(Serialize)]
struct SelectOut {
    criterion: &'static str,
    lambda: Option<f64>,
    calibration: Option<CalibrationOut>,
    s_hat: usize,
    support: Vec<usize>,
    support_names: Option<Vec<String>>,
    path_order: Vec<usize>,
    score_by_s: Vec<f64>,
    refit: Option<RefitOut>,
}

fn cmd_select_l0(a: &SelectL0Args, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let family = parse_family(&a.family)?;
    validate_alpha(a.alpha)?;
    if !(a.gamma >= 0.0) {
        return usage(format!("gamma must be nonnegative, got {}", a.gamma));
    }
    if a.criterion == CriterionArg::PivotalBic && !family.is_gaussian_like() {
        return usage("the pivotal criterion is defined for Gaussian families");
    }
    let d = read_csv(&a.data, &a.response)?;
    let k = a.max_steps.unwrap_or(d.p().min(d.n().saturating_sub(2)));
    let (criterion, name, lambda, calibration) = match a.criterion {
        CriterionArg::Bic => (Criterion::Bic, "bic", None, None),
        CriterionArg::Ebic => (Criterion::Ebic { gamma: a.gamma }, "ebic", None, None),
        CriterionArg::PivotalBic => {
            let (lambda, cal) = match a.lambda {
                Some(l) => (l, None),
                None => {
                    let mode = match a.mode {
                        L0ModeArg::Forward => L0Mode::Forward,
                        L0ModeArg::BestSubset => L0Mode::BestSubset,
                    };
                    let c = pic_l0_lambda(&d, mode, a.alpha, a.draws, seed)?;
                    (c.lambda, Some(CalibrationOut::from(&c)))
                }
            };
            (Criterion::PivotalBic { lambda }, "pivotal-bic", Some(lambda), cal)
        }
    };
    let path = forward_path(&d, &family, k)?;
    let score = select_ic(&path, criterion, d.n(), d.p())?;
    let support = score.support(&path);
    let fit = refit_support(&CompositeLoss::new(family), &d, &support)?;
    let res = SelectOut {
        criterion: name,
        lambda,
        calibration,
        s_hat: score.s_hat,
        support_names: support_names(&d, &support),
        support,
        path_order: path.order.clone(),
        score_by_s: score.score_by_s.clone(),
        refit: refit_out(&d, &fit),
    };
    writeln!(out, "{}", to_json(&res))?;
    Ok(())
}

fn cmd_simulate_phase(a: &PhaseArgs, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let family = parse_family(&a.family)?;
    let n_values: Vec<usize> = parse_list(&a.n, "n")?;
    let methods: Vec<Method> = a
        .methods
        .split(',')
        .map(|m| m.trim().parse::<Method>())
        .collect::<crate::Result<_>>()?;
    let s_values = match &a.s {
        Some(s) => parse_range(s)?,
        None => {
            let top = n_values.iter().map(|n| a.p.min(n / 2)).min().unwrap_or(0);
            (0..=top).collect()
        }
    };
    let mut grid = PhaseGrid::new(family, n_values, a.p, s_values, a.reps, methods, seed);
    grid.alpha = a.alpha;
    grid.beta_value = a.beta;
    grid.cv_folds = a.folds;
    grid.calibration = match a.calibration {
        PhaseCalibration::Mc => CalibrationMode::MonteCarlo { m: a.draws.unwrap_or(DEFAULT_MC_DRAWS) },
        PhaseCalibration::Gauss => {
            CalibrationMode::GaussianAsymptotic { m: a.draws.unwrap_or(DEFAULT_GAUSS_DRAWS) }
        }
    };
    grid.validate()?;
    let to_stdout = a.out == "-";
    let mut w = csv::Writer::from_writer(open_out(&a.out, out)?);
    w.write_record(PHASE_CSV_HEADER)?;
    w.flush()?;
    let mut write_err: Option<csv::Error> = None;
    let result = run_phase_with(&grid, |cells| {
        for c in cells {
            if let Err(e) = w.write_record(c.csv_record()) {
                write_err.get_or_insert(e);
            }
        }
        if let Err(e) = w.flush() {
            write_err.get_or_insert(e.into());
        }
    });
    if let Some(e) = write_err {
        return Err(e.into());
    }
    let curves = match result {
        Ok(c) => c,
        Err(e) => {
            let mut marker = vec![String::new(); PHASE_CSV_HEADER.len()];
            marker[0] = "FAILED".into();
            w.write_record(&marker)?;
            w.flush()?;
            return Err(e.into());
        }
    };
    w.flush()?;
    drop(w);
    if !to_stdout {
        write_summary(&curves, out)?;
    }
    Ok(())
}

fn write_summary(curves: &[PhaseCurve], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{:<10} {:>6} {:>6} {:>6} {:>8} {:>8} {:>10}", "method", "n", "p", "s", "pesr", "se", "fit_s")?;
    for c in curves {
        writeln!(
            out,
            "{:<10} {:>6} {:>6} {:>6} {:>8.3} {:>8.3} {:>10.4}",
            c.method.tag(),
            c.n,
            c.p,
            c.s,
            c.pesr,
            c.se,
            c.mean_fit_seconds
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct NullOut {
    family: String,
    selector: &'static str,
    n: usize,
    p: usize,
    alpha: f64,
    seed: u64,
    lambda: Option<f64>,
    reps: usize,
    empty: usize,
    fraction: f64,
    se: f64,
}

fn cmd_null_coverage(a: &NullArgs, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let family = parse_family(&a.family)?;
    validate_alpha(a.alpha)?;
    let mut cfg = NullCoverageConfig::new(family, a.n, a.p, a.alpha, a.reps, seed);
    cfg.mc_draws = a.draws;
    cfg.lambda_override = a.lambda;
    cfg.selector = match a.selector {
        SelectorArg::PicL1 => NullSelector::PicL1,
        SelectorArg::PicL0 => NullSelector::PicL0Forward,
    };
    let r = run_null_coverage_with(&cfg)?;
    let res = NullOut {
        family: family.to_string(),
        selector: match a.selector {
            SelectorArg::PicL1 => "pic-l1",
            SelectorArg::PicL0 => "pic-l0",
        },
        n: a.n,
        p: a.p,
        alpha: a.alpha,
        seed,
        lambda: a.lambda,
        reps: r.reps,
        empty: r.empty,
        fraction: r.fraction,
        se: r.se,
    };
    writeln!(out, "{}", to_json(&res))?;
    Ok(())
}

fn cmd_demo_poisson(a: &DemoArgs, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = DemoConfig::new(a.n, parse_list(&a.mu0, "mu0")?, parse_list(&a.s, "s")?, seed);
    cfg.alpha = a.alpha;
    cfg.gauss_draws = a.draws;
    cfg.mc_draws = a.mc_draws;
    let table = poisson_pivot_demo_with(&cfg)?;
    let mut w = open_out(&a.out, out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Calibrate(a) => cmd_calibrate(a, seed, out),
        Command::Fit(a) => cmd_fit(a, seed, out),
        Command::SelectL0(a) => cmd_select_l0(a, seed, out),
        Command::SimulatePhase(a) => cmd_simulate_phase(a, seed, out),
        Command::NullCoverage(a) => cmd_null_coverage(a, seed, out),
        Command::DemoPoisson(a) => cmd_demo_poisson(a, seed, out),
    }
}

#[derive(Serialize)]
struct ErrorOut<'a> {
    error: &'a str,
    message: &'a str,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let _ = writeln!(err, "{}", to_json(&ErrorOut { error: "usage", message: msg.trim() }));
            return 2;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => {
                // output is collected on the pool and copied out afterwards
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(&cli, &mut buf));
                out.write_all(&buf).map_err(Failure::from).and(r)
            }
            Err(e) => Err(Failure::Compute(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli, out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "{}", to_json(&ErrorOut { error: "usage", message: &m }));
            2
        }
        Err(Failure::Compute(m)) => {
            let _ = writeln!(err, "{}", to_json(&ErrorOut { error: "computation", message: &m }));
            1
        }
    }
}
