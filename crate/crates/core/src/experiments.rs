//! Simulation harness: exact-support-recovery phase transitions, null
//! coverage of the pre-set penalty level, and the Poisson pivotality demo.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{
    self, calibrate_gaussian_asymptotic, calibrate_mc, gaussian_quantile_from_gram,
    upper_quantile, validate_alpha, DEFAULT_GAUSS_DRAWS, DEFAULT_MC_DRAWS,
};
use crate::error::{PicError, Result};
use crate::format::fmt_f64;
use crate::losses::CompositeLoss;
use crate::model::{generate_synthetic, poisson_draw, Dataset, FamilySpec, PenaltySpec, TruthSpec};
use crate::rng::{self, derive_seed};
use crate::solver::{fit_pic, SolverConfig};
use crate::subset::{
    cv_lasso, forward_path, forward_path_with, pic_l0_lambda, select_ic, Criterion, L0Mode,
    DEFAULT_EBIC_GAMMA, DEFAULT_FOLDS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    PicL1,
    PicScad,
    PicL0,
    Bic,
    Ebic,
    CvLasso,
    /// Returns the true support; a self-test of the harness.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::PicL1,
        Method::PicScad,
        Method::PicL0,
        Method::Bic,
        Method::Ebic,
        Method::CvLasso,
        Method::Oracle,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::PicL1 => "pic-l1",
            Method::PicScad => "pic-scad",
            Method::PicL0 => "pic-l0",
            Method::Bic => "bic",
            Method::Ebic => "ebic",
            Method::CvLasso => "cv-lasso",
            Method::Oracle => "oracle",
        }
    }

    fn supports(&self, family: &FamilySpec) -> bool {
        match self {
            Method::PicL1 | Method::PicScad | Method::Oracle => true,
            Method::PicL0 => family.is_gaussian_like(),
            Method::Bic | Method::Ebic | Method::CvLasso => {
                family.is_gaussian_like() || family.is_binary()
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = PicError;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .find(|m| m.tag() == s)
            .copied()
            .ok_or_else(|| PicError::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// How the continuous-penalty methods obtain their penalty level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CalibrationMode {
    MonteCarlo { m: usize },
    GaussianAsymptotic { m: usize },
}

impl Default for CalibrationMode {
    fn default() -> Self {
        CalibrationMode::MonteCarlo { m: DEFAULT_MC_DRAWS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub family: FamilySpec,
    pub n_values: Vec<usize>,
    pub p: usize,
    pub s_values: Vec<usize>,
    pub reps: usize,
    pub beta_value: f64,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub calibration: CalibrationMode,
    pub cv_folds: usize,
}

impl PhaseGrid {
    /// Grid with the default calibration and fold count.
    pub fn new(
        family: FamilySpec,
        n_values: Vec<usize>,
        p: usize,
        s_values: Vec<usize>,
        reps: usize,
        methods: Vec<Method>,
        master_seed: u64,
    ) -> Self {
        PhaseGrid {
            family,
            n_values,
            p,
            s_values,
            reps,
            beta_value: 3.0,
            alpha: calibration::DEFAULT_ALPHA,
            methods,
            master_seed,
            calibration: CalibrationMode::default(),
            cv_folds: DEFAULT_FOLDS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PicError::InvalidArgument(m));
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        if let Some(m) = self.methods.iter().find(|m| !m.supports(&self.family)) {
            return bad(format!("method {m} does not support family {}", self.family));
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.p < 1 || self.n_values.is_empty() || self.s_values.is_empty() {
            return bad("empty grid".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 3) {
            return bad(format!("n = {n} is too small"));
        }
        if let Some(s) = self.s_values.iter().find(|&&s| s > self.p) {
            return bad(format!("s = {s} exceeds p = {}", self.p));
        }
        if !self.beta_value.is_finite() || self.beta_value == 0.0 {
            return bad("beta_value must be finite and nonzero".into());
        }
        validate_alpha(self.alpha)?;
        match self.calibration {
            CalibrationMode::MonteCarlo { m } | CalibrationMode::GaussianAsymptotic { m }
                if m < calibration::MIN_DRAWS =>
            {
                bad(format!("calibration needs at least {} draws", calibration::MIN_DRAWS))
            }
            _ => Ok(()),
        }?;
        if self.methods.contains(&Method::CvLasso)
            && (self.cv_folds < 2 || self.n_values.iter().any(|&n| n < self.cv_folds))
        {
            return bad(format!("cv_folds = {} is not usable for every n", self.cv_folds));
        }
        Ok(())
    }
}

/// Exact-support-recovery estimate for one method at one `(n, s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub reps: usize,
    pub pesr: f64,
    pub se: f64,
    pub mean_fit_seconds: f64,
}

pub const PHASE_CSV_HEADER: [&str; 8] =
    ["method", "n", "p", "s", "rep_count", "pesr", "se", "mean_fit_seconds"];

impl PhaseCurve {
    pub fn csv_record(&self) -> [String; 8] {
        [
            self.method.tag().to_string(),
            self.n.to_string(),
            self.p.to_string(),
            self.s.to_string(),
            self.reps.to_string(),
            fmt_f64(self.pesr),
            fmt_f64(self.se),
            fmt_f64(self.mean_fit_seconds),
        ]
    }
}

pub fn write_phase_csv<W: Write>(curves: &[PhaseCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PHASE_CSV_HEADER)?;
    for c in curves {
        w.write_record(c.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Simulated dataset and true support for one replicate.
pub fn phase_replicate(
    family: &FamilySpec,
    n: usize,
    p: usize,
    s: usize,
    beta_value: f64,
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    let mut r = rng::stream(seed, &[rng::TAG_SUPPORT]);
    let truth = TruthSpec::random_support(&mut r, p, s, beta_value, 0.0, 1.0)?;
    let d = generate_synthetic(family, &truth, n, p, seed)?;
    Ok((d, truth.support))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Runs every method on one replicate; returns `(recovered, seconds)` per method.
fn run_replicate(grid: &PhaseGrid, n: usize, s: usize, seed: u64) -> Result<Vec<(bool, f64)>> {
    let family = &grid.family;
    let (d, truth) = phase_replicate(family, n, grid.p, s, grid.beta_value, seed)?;
    let cal_seed = derive_seed(seed, &[rng::TAG_CALIBRATION]);
    let mut shared: Option<(f64, f64)> = None;
    let mut pic_lambda = |d: &Dataset| -> Result<(f64, f64)> {
        if let Some(v) = shared {
            return Ok(v);
        }
        let t = Instant::now();
        let lambda = match grid.calibration {
            CalibrationMode::MonteCarlo { m } => calibrate_mc(family, d, grid.alpha, m, cal_seed)?,
            CalibrationMode::GaussianAsymptotic { m } => {
                calibrate_gaussian_asymptotic(family, d, grid.alpha, m, cal_seed)?
            }
        }
        .lambda;
        shared = Some((lambda, t.elapsed().as_secs_f64()));
        Ok(shared.unwrap())
    };
    let cl = CompositeLoss::new(*family);
    let k_max = grid.p.min(n - 2);
    let mut out = Vec::with_capacity(grid.methods.len());
    for method in &grid.methods {
        let t = Instant::now();
        let mut extra = 0.0;
        let support = match method {
            Method::Oracle => truth.clone(),
            Method::PicL1 | Method::PicScad => {
                let (lambda, secs) = pic_lambda(&d)?;
                extra = secs;
                let penalty =
                    if *method == Method::PicL1 { PenaltySpec::L1 } else { PenaltySpec::scad_default() };
                fit_pic(&cl, &penalty, lambda, &d, &SolverConfig::default())?.support_hat
            }
            Method::PicL0 => {
                let m = match grid.calibration {
                    CalibrationMode::MonteCarlo { m } | CalibrationMode::GaussianAsymptotic { m } => m,
                };
                let lambda = pic_l0_lambda(&d, L0Mode::Forward, grid.alpha, m, cal_seed)?.lambda;
                let path = forward_path(&d, family, k_max)?;
                let score = select_ic(&path, Criterion::PivotalBic { lambda }, n, grid.p)?;
                score.support(&path)
            }
            Method::Bic | Method::Ebic => {
                let criterion = if *method == Method::Bic {
                    Criterion::Bic
                } else {
                    Criterion::Ebic { gamma: DEFAULT_EBIC_GAMMA }
                };
                let path = forward_path_with(&d, family, k_max, Some(DEFAULT_EBIC_GAMMA))?;
                let score = select_ic(&path, criterion, n, grid.p)?;
                score.support(&path)
            }
            Method::CvLasso => {
                let fold_seed = derive_seed(seed, &[rng::TAG_FOLDS]);
                cv_lasso(&d, family, grid.cv_folds, fold_seed)?.support_hat
            }
        };
        out.push((sorted(support) == truth, t.elapsed().as_secs_f64() + extra));
    }
    Ok(out)
}

/// Phase-transition grid, reporting each finished `(n, s)` cell to `on_cell`
/// as soon as it completes.
pub fn run_phase_with<F>(grid: &PhaseGrid, mut on_cell: F) -> Result<Vec<PhaseCurve>>
where
    F: FnMut(&[PhaseCurve]),
{
    grid.validate()?;
    let mut curves = Vec::new();
    for &n in &grid.n_values {
        for &s in &grid.s_values {
            let results: Vec<Vec<(bool, f64)>> = (0..grid.reps as u64)
                .into_par_iter()
                .map(|rep| {
                    let seed = derive_seed(grid.master_seed, &[n as u64, s as u64, rep]);
                    run_replicate(grid, n, s, seed)
                })
                .collect::<Result<_>>()?;
            let start = curves.len();
            for (k, method) in grid.methods.iter().enumerate() {
                let hits = results.iter().filter(|r| r[k].0).count();
                let secs: f64 = results.iter().map(|r| r[k].1).sum();
                let reps = grid.reps as f64;
                let pesr = hits as f64 / reps;
                curves.push(PhaseCurve {
                    method: *method,
                    n,
                    p: grid.p,
                    s,
                    reps: grid.reps,
                    pesr,
                    se: (pesr * (1.0 - pesr) / reps).sqrt(),
                    mean_fit_seconds: secs / reps,
                });
            }
            on_cell(&curves[start..]);
        }
    }
    Ok(curves)
}

pub fn run_phase(grid: &PhaseGrid) -> Result<Vec<PhaseCurve>> {
    run_phase_with(grid, |_| {})
}

/// Selector used on null data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NullSelector {
    /// L1-penalized fit at the Monte Carlo penalty level.
    PicL1,
    /// Forward path scored by the pivotal l0 criterion.
    PicL0Forward,
}

impl FromStr for NullSelector {
    type Err = PicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pic-l1" => Ok(NullSelector::PicL1),
            "pic-l0" | "pic-l0-forward" => Ok(NullSelector::PicL0Forward),
            _ => Err(PicError::InvalidArgument(format!("unknown null-coverage selector '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCoverageConfig {
    pub family: FamilySpec,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub selector: NullSelector,
    pub mc_draws: usize,
    /// Skip calibration and use this penalty level.
    pub lambda_override: Option<f64>,
}

impl NullCoverageConfig {
    pub fn new(family: FamilySpec, n: usize, p: usize, alpha: f64, reps: usize, seed: u64) -> Self {
        NullCoverageConfig {
            family,
            n,
            p,
            alpha,
            reps,
            seed,
            selector: NullSelector::PicL1,
            mc_draws: DEFAULT_MC_DRAWS,
            lambda_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCoverage {
    pub fraction: f64,
    pub empty: usize,
    pub reps: usize,
    pub se: f64,
}

/// Fraction of pure-noise replicates on which the selector returns the empty model.
pub fn run_null_coverage_with(cfg: &NullCoverageConfig) -> Result<NullCoverage> {
    validate_alpha(cfg.alpha)?;
    if cfg.reps < 100 {
        return Err(PicError::InvalidArgument(format!("reps must be at least 100, got {}", cfg.reps)));
    }
    if cfg.n < 3 || cfg.p < 1 {
        return Err(PicError::InvalidArgument("need n >= 3 and p >= 1".into()));
    }
    if let Some(l) = cfg.lambda_override {
        if !(l > 0.0) {
            return Err(PicError::InvalidArgument(format!("lambda must be positive, got {l}")));
        }
    }
    if cfg.selector == NullSelector::PicL0Forward && !cfg.family.is_gaussian_like() {
        return Err(PicError::InvalidArgument("the l0 selector is Gaussian only".into()));
    }
    let cl = CompositeLoss::new(cfg.family);
    let empties: Vec<bool> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<bool> {
            let seed = derive_seed(cfg.seed, &[rep]);
            let cal_seed = derive_seed(seed, &[rng::TAG_CALIBRATION]);
            // resample designs whose null response is degenerate (rare for binary data)
            let mut attempt = 0u64;
            let d = loop {
                let (d, _) = phase_replicate(&cfg.family, cfg.n, cfg.p, 0, 1.0, derive_seed(seed, &[attempt]))?;
                match crate::losses::null_mle(&cl, &d) {
                    Ok(_) => break d,
                    Err(PicError::DegenerateResponse(_)) if attempt < 10 => attempt += 1,
                    Err(e) => return Err(e),
                }
            };
            match cfg.selector {
                NullSelector::PicL1 => {
                    let lambda = match cfg.lambda_override {
                        Some(l) => l,
                        None => calibrate_mc(&cfg.family, &d, cfg.alpha, cfg.mc_draws, cal_seed)?.lambda,
                    };
                    Ok(fit_pic(&cl, &PenaltySpec::L1, lambda, &d, &SolverConfig::default())?.is_null())
                }
                NullSelector::PicL0Forward => {
                    let lambda = match cfg.lambda_override {
                        Some(l) => l,
                        None => pic_l0_lambda(&d, L0Mode::Forward, cfg.alpha, cfg.mc_draws, cal_seed)?.lambda,
                    };
                    let path = forward_path(&d, &cfg.family, cfg.p.min(cfg.n - 2))?;
                    Ok(select_ic(&path, Criterion::PivotalBic { lambda }, cfg.n, cfg.p)?.s_hat == 0)
                }
            }
        })
        .collect::<Result<_>>()?;
    let empty = empties.iter().filter(|e| **e).count();
    let fraction = empty as f64 / cfg.reps as f64;
    Ok(NullCoverage {
        fraction,
        empty,
        reps: cfg.reps,
        se: (fraction * (1.0 - fraction) / cfg.reps as f64).sqrt(),
    })
}

/// Null coverage of the L1 selector at the Monte Carlo penalty level.
pub fn run_null_coverage(
    family: &FamilySpec,
    n: usize,
    p: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    Ok(run_null_coverage_with(&NullCoverageConfig::new(*family, n, p, alpha, reps, seed))?.fraction)
}

/// Signals sit this many `sqrt(mu0)` units above the background on the
/// `eta = 2 sqrt(mu)` scale.
pub const DEMO_SIGNAL_SHIFT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoConfig {
    pub n: usize,
    pub mu0_list: Vec<f64>,
    pub s_list: Vec<usize>,
    pub seed: u64,
    pub alpha: f64,
    /// Draws for the pivotal (Gaussian) boundary.
    pub gauss_draws: usize,
    /// Draws for each scenario's canonical-pair boundary.
    pub mc_draws: usize,
}

impl DemoConfig {
    pub fn new(n: usize, mu0_list: Vec<f64>, s_list: Vec<usize>, seed: u64) -> Self {
        DemoConfig {
            n,
            mu0_list,
            s_list,
            seed,
            alpha: calibration::DEFAULT_ALPHA,
            gauss_draws: DEFAULT_GAUSS_DRAWS,
            mc_draws: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoScenario {
    pub mu0: f64,
    pub s: usize,
    pub signal: Vec<usize>,
    pub counts: Vec<f64>,
    /// `|y_i - ybar| / (n sqrt(ybar))`, the gradient under `mu = u^2 / 4`.
    pub pivotal_gradient: Vec<f64>,
    /// `|y_i - ybar| / n`, the gradient under the canonical `exp` link.
    pub canonical_gradient: Vec<f64>,
    pub pivotal_lambda: f64,
    pub canonical_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoTable {
    pub n: usize,
    pub alpha: f64,
    pub scenarios: Vec<DemoScenario>,
}

impl DemoTable {
    /// Long-format CSV; the first line is a `#` comment stating the signal rule.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# identity design, n = {}; signals at eta = 2 sqrt(mu0) + {} sqrt(mu0), i.e. mu = {} mu0; alpha = {}",
            self.n,
            DEMO_SIGNAL_SHIFT,
            (1.0 + DEMO_SIGNAL_SHIFT / 2.0).powi(2),
            self.alpha
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario", "component", "value_kind", "value"])?;
        for (k, sc) in self.scenarios.iter().enumerate() {
            let scen = k.to_string();
            let mut row = |comp: String, kind: &str, v: f64| {
                w.write_record([scen.as_str(), comp.as_str(), kind, fmt_f64(v).as_str()])
            };
            row("all".into(), "mu0", sc.mu0)?;
            row("all".into(), "s", sc.s as f64)?;
            row("all".into(), "pivotal_boundary", sc.pivotal_lambda)?;
            row("all".into(), "canonical_boundary", sc.canonical_lambda)?;
            for i in 0..sc.counts.len() {
                let c = i.to_string();
                row(c.clone(), "count", sc.counts[i])?;
                row(c.clone(), "signal", if sc.signal.binary_search(&i).is_ok() { 1.0 } else { 0.0 })?;
                row(c.clone(), "pivotal_gradient", sc.pivotal_gradient[i])?;
                row(c, "canonical_gradient", sc.canonical_gradient[i])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Componentwise gradients of the Poisson null fit under the pivotal and the
/// canonical transformation pairs on an identity design.
pub fn poisson_pivot_demo_with(cfg: &DemoConfig) -> Result<DemoTable> {
    validate_alpha(cfg.alpha)?;
    if cfg.mu0_list.len() != cfg.s_list.len() || cfg.mu0_list.is_empty() {
        return Err(PicError::InvalidArgument(
            "mu0 and s lists must be nonempty and of equal length".into(),
        ));
    }
    if cfg.n < 3 {
        return Err(PicError::InvalidArgument("n must be at least 3".into()));
    }
    if let Some(mu) = cfg.mu0_list.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(PicError::InvalidArgument(format!("background mean must be positive, got {mu}")));
    }
    if let Some(s) = cfg.s_list.iter().find(|&&s| s > cfg.n) {
        return Err(PicError::InvalidArgument(format!("s = {s} exceeds n = {}", cfg.n)));
    }
    if cfg.gauss_draws < calibration::MIN_DRAWS || cfg.mc_draws < calibration::MIN_DRAWS {
        return Err(PicError::InvalidArgument("too few calibration draws".into()));
    }
    let n = cfg.n;
    let nf = n as f64;
    // identity design: the Gram matrix is I / n, the same for every scenario
    let gram = DMatrix::<f64>::identity(n, n) / nf;
    let pivotal_lambda = gaussian_quantile_from_gram(
        &gram,
        n,
        1.0,
        cfg.alpha,
        cfg.gauss_draws,
        derive_seed(cfg.seed, &[rng::TAG_DEMO, 0]),
    )?;
    let mut scenarios = Vec::with_capacity(cfg.mu0_list.len());
    for (k, (&mu0, &s)) in cfg.mu0_list.iter().zip(&cfg.s_list).enumerate() {
        let mut r = rng::stream(cfg.seed, &[rng::TAG_DEMO, 1, k as u64]);
        let signal = sorted(rand::seq::index::sample(&mut r, n, s).into_vec());
        let mu_signal = (1.0 + DEMO_SIGNAL_SHIFT / 2.0).powi(2) * mu0;
        let mut counts = Vec::with_capacity(n);
        for i in 0..n {
            let mu = if signal.binary_search(&i).is_ok() { mu_signal } else { mu0 };
            counts.push(poisson_draw(mu, &mut r)?);
        }
        let ybar = counts.iter().sum::<f64>() / nf;
        if ybar == 0.0 {
            return Err(PicError::DegenerateResponse(format!("scenario {k}: all counts are zero")));
        }
        let canonical_gradient: Vec<f64> = counts.iter().map(|y| (y - ybar).abs() / nf).collect();
        let pivotal_gradient: Vec<f64> = canonical_gradient.iter().map(|g| g / ybar.sqrt()).collect();
        let mut draws = calibration::mc_draws(
            cfg.mc_draws,
            derive_seed(cfg.seed, &[rng::TAG_DEMO, 2, k as u64]),
            rng::TAG_CALIBRATION,
            |r| {
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    ys.push(poisson_draw(ybar, r)?);
                }
                let m = ys.iter().sum::<f64>() / nf;
                Ok(ys.iter().map(|y| (y - m).abs()).fold(0.0, f64::max) / nf)
            },
        )?;
        let canonical_lambda = upper_quantile(&mut draws, cfg.alpha);
        scenarios.push(DemoScenario {
            mu0,
            s,
            signal,
            counts,
            pivotal_gradient,
            canonical_gradient,
            pivotal_lambda,
            canonical_lambda,
        });
    }
    Ok(DemoTable { n, alpha: cfg.alpha, scenarios })
}

pub fn poisson_pivot_demo(n: usize, mu0_list: &[f64], s_list: &[usize], seed: u64) -> Result<DemoTable> {
    poisson_pivot_demo_with(&DemoConfig::new(n, mu0_list.to_vec(), s_list.to_vec(), seed))
}
