//! The zero-thresholding statistic and the three ways of turning its null
//! distribution into a pre-set penalty level.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PicError, Result};
use crate::losses::{gumbel_mle, null_mle_y, CompositeLoss};
use crate::model::{draw_response, Dataset, Family, FamilySpec};
use crate::rng;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MC_DRAWS: usize = 1000;
pub const DEFAULT_GAUSS_DRAWS: usize = 10_000;
pub const MIN_DRAWS: usize = 100;
const EIGEN_CLIP: f64 = 1e-12;
const MAX_REDRAWS: u64 = 10;

/// Sup-norm of the loss gradient at the null fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStatistic {
    pub value: f64,
    pub family: FamilySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CalibrationMethod {
    MonteCarlo { m: usize, seed: u64 },
    GaussianAsymptotic { m: usize, seed: u64 },
    ClosedForm,
    /// Monte Carlo for the one-step forward-selection statistic.
    L0Forward { m: usize, seed: u64 },
    /// Monte Carlo for the best-subset statistic.
    L0BestSubset { m: usize, seed: u64 },
}

impl CalibrationMethod {
    pub fn draws(&self) -> Option<usize> {
        match *self {
            CalibrationMethod::ClosedForm => None,
            CalibrationMethod::MonteCarlo { m, .. }
            | CalibrationMethod::GaussianAsymptotic { m, .. }
            | CalibrationMethod::L0Forward { m, .. }
            | CalibrationMethod::L0BestSubset { m, .. } => Some(m),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            CalibrationMethod::ClosedForm => None,
            CalibrationMethod::MonteCarlo { seed, .. }
            | CalibrationMethod::GaussianAsymptotic { seed, .. }
            | CalibrationMethod::L0Forward { seed, .. }
            | CalibrationMethod::L0BestSubset { seed, .. } => Some(seed),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CalibrationMethod::MonteCarlo { .. } => "mc",
            CalibrationMethod::GaussianAsymptotic { .. } => "gauss",
            CalibrationMethod::ClosedForm => "closed",
            CalibrationMethod::L0Forward { .. } => "l0-forward",
            CalibrationMethod::L0BestSubset { .. } => "l0-best-subset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub lambda: f64,
    pub alpha: f64,
    pub method: CalibrationMethod,
    pub family: FamilySpec,
}

/// Nuisance parameters used to simulate null responses. The statistic is
/// (exactly or asymptotically) free of them, so any admissible value works.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Nuisance {
    LocationScale { location: f64, scale: f64 },
    Mean(f64),
}

impl Nuisance {
    pub fn default_for(family: &FamilySpec) -> Nuisance {
        match family.family() {
            Family::BernoulliNll | Family::BernoulliWsl => Nuisance::Mean(0.5),
            Family::PoissonNll | Family::PoissonWsl | Family::ExponentialNll => Nuisance::Mean(1.0),
            _ => Nuisance::LocationScale { location: 0.0, scale: 1.0 },
        }
    }

    /// Linear predictor (canonical link for exponential families) and scale.
    fn eta_sigma(&self, family: &FamilySpec) -> Result<(f64, f64)> {
        let bad = |m: String| Err(PicError::InvalidArgument(m));
        match (*self, family.is_location_scale()) {
            (Nuisance::LocationScale { location, scale }, true) => {
                if !(scale > 0.0 && scale.is_finite() && location.is_finite()) {
                    return bad(format!("invalid location/scale ({location}, {scale})"));
                }
                Ok((location, scale))
            }
            (Nuisance::Mean(mu), false) => match family.family() {
                Family::BernoulliNll | Family::BernoulliWsl => {
                    if !(mu > 0.0 && mu < 1.0) {
                        return bad(format!("Bernoulli mean must lie in (0,1), got {mu}"));
                    }
                    Ok(((mu / (1.0 - mu)).ln(), 1.0))
                }
                _ => {
                    if !(mu > 0.0 && mu.is_finite()) {
                        return bad(format!("mean must be positive, got {mu}"));
                    }
                    Ok((mu.ln(), 1.0))
                }
            },
            _ => bad(format!("nuisance {self:?} does not fit family {family}")),
        }
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(PicError::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

fn validate_draws(m: usize) -> Result<()> {
    if m < MIN_DRAWS {
        return Err(PicError::InvalidArgument(format!(
            "need at least {MIN_DRAWS} draws, got {m}"
        )));
    }
    Ok(())
}

/// The `ceil((1 - alpha) M)`-th smallest draw. Sorts `draws` in place.
pub(crate) fn upper_quantile(draws: &mut [f64], alpha: f64) -> f64 {
    draws.sort_by(|a, b| a.total_cmp(b));
    let m = draws.len() as f64;
    // guard against (1 - alpha) * M landing a hair above an integer
    let k = ((1.0 - alpha) * m - 1e-9 * m).ceil().clamp(1.0, m) as usize;
    draws[k - 1]
}

/// Fills `g` with the per-observation gradient at the null fit, so that the
/// statistic is `||X^T g||_inf`.
pub(crate) fn null_score(family: &FamilySpec, y: &[f64], g: &mut [f64]) -> Result<()> {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let centered = |g: &mut [f64], k: f64| {
        for (gi, yi) in g.iter_mut().zip(y) {
            *gi = (yi - ybar) * k;
        }
    };
    match family.family() {
        _ if family.is_gaussian_like() => {
            let norm = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(PicError::DegenerateResponse(
                    "constant response; the null scale estimate is zero".into(),
                ));
            }
            let c = if family.family() == Family::GaussianNll { family.c() } else { 1.0 };
            centered(g, (c / n).sqrt() / norm);
        }
        Family::Laplace => {
            let m = crate::losses::median(y);
            for (gi, yi) in g.iter_mut().zip(y) {
                *gi = if *yi > m {
                    1.0 / n
                } else if *yi < m {
                    -1.0 / n
                } else {
                    0.0
                };
            }
        }
        Family::GumbelNll => {
            let (mu, sigma) = gumbel_mle(y)?;
            let zbar = (ybar - mu) / sigma;
            let k = (1.0 - zbar).exp() / n;
            for (gi, yi) in g.iter_mut().zip(y) {
                *gi = k * (((yi - mu) / sigma).exp() - 1.0);
            }
        }
        Family::Subbotin { .. } => {
            let nm = null_mle_y(family, y)?;
            let eta = vec![nm.beta0_hat; y.len()];
            CompositeLoss::new(*family).eval(&eta, y, None, Some(g))?;
        }
        Family::BernoulliNll | Family::BernoulliWsl => {
            null_mle_y(family, y)?;
            centered(g, 1.0 / (n * (ybar * (1.0 - ybar)).sqrt()));
        }
        Family::PoissonNll | Family::PoissonWsl => {
            null_mle_y(family, y)?;
            centered(g, 1.0 / (n * ybar.sqrt()));
        }
        Family::ExponentialNll => {
            null_mle_y(family, y)?;
            centered(g, 1.0 / (n * ybar));
        }
        Family::GaussianMse | Family::GaussianNll => unreachable!("handled as gaussian-like"),
    }
    Ok(())
}

pub(crate) fn lambda_stat_xy(family: &FamilySpec, x: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let mut g = DVector::zeros(y.len());
    null_score(family, y, g.as_mut_slice())?;
    Ok(x.tr_mul(&g).amax())
}

/// Zero-thresholding statistic `||grad_beta L(0, tau_hat)||_inf`.
pub fn lambda_stat(family: &FamilySpec, d: &Dataset) -> Result<LambdaStatistic> {
    CompositeLoss::new(*family).validate_response(d.y().as_slice())?;
    let value = lambda_stat_xy(family, d.x(), d.y().as_slice())?;
    Ok(LambdaStatistic { value, family: *family })
}

/// Runs `draw(rng)` for `m` replicates with independent per-replicate streams,
/// redrawing replicates whose null fit is degenerate.
pub(crate) fn mc_draws<F>(m: usize, seed: u64, tag: u64, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..m as u64)
        .into_par_iter()
        .map(|k| {
            let mut last = None;
            for attempt in 0..=MAX_REDRAWS {
                let mut r = rng::stream(seed, &[tag, k, attempt]);
                match draw(&mut r) {
                    Ok(v) => return Ok(v),
                    Err(e @ PicError::DegenerateResponse(_)) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(PicError::Calibration(format!(
                "replicate {k} stayed degenerate after {MAX_REDRAWS} redraws: {}",
                last.map(|e| e.to_string()).unwrap_or_default()
            )))
        })
        .collect()
}

/// Monte Carlo calibration with the default nuisance values.
pub fn calibrate_mc(
    family: &FamilySpec,
    d: &Dataset,
    alpha: f64,
    m: usize,
    seed: u64,
) -> Result<CalibrationResult> {
    calibrate_mc_with(family, d, alpha, m, seed, Nuisance::default_for(family))
}

/// Monte Carlo calibration simulating null responses at `nuisance`.
pub fn calibrate_mc_with(
    family: &FamilySpec,
    d: &Dataset,
    alpha: f64,
    m: usize,
    seed: u64,
    nuisance: Nuisance,
) -> Result<CalibrationResult> {
    validate_alpha(alpha)?;
    validate_draws(m)?;
    let mut draws = mc_lambda_draws(family, d.x(), m, seed, nuisance)?;
    Ok(CalibrationResult {
        lambda: upper_quantile(&mut draws, alpha),
        alpha,
        method: CalibrationMethod::MonteCarlo { m, seed },
        family: *family,
    })
}

/// Raw Monte Carlo draws of the statistic on design `x`.
pub fn mc_lambda_draws(
    family: &FamilySpec,
    x: &DMatrix<f64>,
    m: usize,
    seed: u64,
    nuisance: Nuisance,
) -> Result<Vec<f64>> {
    let (eta0, sigma) = nuisance.eta_sigma(family)?;
    let eta = vec![eta0; x.nrows()];
    mc_draws(m, seed, rng::TAG_CALIBRATION, |r| {
        let y = draw_response(family, &eta, sigma, r)?;
        lambda_stat_xy(family, x, &y)
    })
}

/// Quantile of `sqrt(c) ||N(0, gram)||_inf / sqrt(n)`.
pub(crate) fn gaussian_quantile_from_gram(
    gram: &DMatrix<f64>,
    n: usize,
    c: f64,
    alpha: f64,
    m: usize,
    seed: u64,
) -> Result<f64> {
    let mut draws = gaussian_draws_from_gram(gram, n, c, m, seed)?;
    Ok(upper_quantile(&mut draws, alpha))
}

pub(crate) fn gaussian_draws_from_gram(
    gram: &DMatrix<f64>,
    n: usize,
    c: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(PicError::Calibration("Gram matrix has non-finite entries".into()));
    }
    let p = gram.nrows();
    let diagonal = (0..p).all(|j| (0..p).all(|i| i == j || gram[(i, j)] == 0.0));
    let scale = (c / n as f64).sqrt();
    if diagonal {
        let sd: Vec<f64> = (0..p).map(|j| gram[(j, j)].max(0.0).sqrt()).collect();
        return mc_draws(m, seed, rng::TAG_CALIBRATION, |r| {
            let mut best = 0.0f64;
            for s in &sd {
                let z: f64 = r.sample(StandardNormal);
                best = best.max((s * z).abs());
            }
            Ok(scale * best)
        });
    }
    let eig = SymmetricEigen::new(gram.clone());
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l < EIGEN_CLIP { 0.0 } else { l.sqrt() })
        .collect();
    let keep: Vec<usize> = (0..p).filter(|&k| roots[k] > 0.0).collect();
    let mut factor = DMatrix::zeros(p, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        factor.set_column(col, &(eig.eigenvectors.column(k) * roots[k]));
    }
    let factor = &factor;
    let r_dim = keep.len();
    mc_draws(m, seed, rng::TAG_CALIBRATION, |r| {
        let z = DVector::from_fn(r_dim, |_, _| r.sample::<f64, _>(StandardNormal));
        Ok(scale * (factor * z).amax())
    })
}

/// Gaussian approximation using the Gram matrix of the standardized design.
pub fn calibrate_gaussian_asymptotic(
    family: &FamilySpec,
    d: &Dataset,
    alpha: f64,
    m: usize,
    seed: u64,
) -> Result<CalibrationResult> {
    validate_alpha(alpha)?;
    validate_draws(m)?;
    if !d.is_standardized() {
        return Err(PicError::InvalidArgument(
            "Gaussian calibration needs a standardized design".into(),
        ));
    }
    let gram = d.x().tr_mul(d.x()) / d.n() as f64;
    let lambda = gaussian_quantile_from_gram(&gram, d.n(), family.c(), alpha, m, seed)?;
    Ok(CalibrationResult {
        lambda,
        alpha,
        method: CalibrationMethod::GaussianAsymptotic { m, seed },
        family: *family,
    })
}

/// `sqrt((2/n) log(2p/alpha))`, a union bound on the Gaussian maximum.
pub fn calibrate_closed_form(n: usize, p: usize, alpha: f64) -> Result<CalibrationResult> {
    validate_alpha(alpha)?;
    if n == 0 || p == 0 {
        return Err(PicError::InvalidArgument("n and p must be positive".into()));
    }
    let lambda = (2.0 / n as f64 * (2.0 * p as f64 / alpha).ln()).sqrt();
    Ok(CalibrationResult {
        lambda,
        alpha,
        method: CalibrationMethod::ClosedForm,
        family: FamilySpec::gaussian(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::raw(
            DMatrix::from_column_slice(x.len(), 1, x),
            DVector::from_column_slice(y),
        )
        .unwrap()
    }

    fn fam(f: Family) -> FamilySpec {
        FamilySpec::new(f).unwrap()
    }

    #[test]
    fn hand_examples() {
        let g = lambda_stat(&FamilySpec::gaussian(), &toy(&[1.0, -1.0], &[3.0, 1.0])).unwrap();
        assert_abs_diff_eq!(g.value, 1.0, epsilon = 1e-15);
        let b = lambda_stat(
            &fam(Family::BernoulliWsl),
            &toy(&[1.0, -1.0, 1.0, -1.0], &[1.0, 0.0, 1.0, 0.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-15);
        let p = lambda_stat(&fam(Family::PoissonWsl), &toy(&[1.0, -1.0], &[4.0, 0.0])).unwrap();
        assert_abs_diff_eq!(p.value, 2f64.sqrt(), epsilon = 1e-15);
        let e = lambda_stat(&fam(Family::ExponentialNll), &toy(&[1.0, -1.0], &[3.0, 1.0])).unwrap();
        assert_abs_diff_eq!(e.value, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn orthogonal_residual_gives_zero() {
        let d = toy(&[1.0, -1.0, -1.0, 1.0], &[2.0, 2.0, 5.0, 5.0]);
        for f in [Family::GaussianMse, Family::PoissonWsl, Family::ExponentialNll] {
            assert_eq!(lambda_stat(&fam(f), &d).unwrap().value, 0.0);
        }
    }

    #[test]
    fn quantile_convention() {
        let mut v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(upper_quantile(&mut v, 0.05), 950.0);
        assert_eq!(upper_quantile(&mut v, 0.0005), 1000.0);
        let mut v: Vec<f64> = (1..=100).rev().map(|k| k as f64).collect();
        assert_eq!(upper_quantile(&mut v, 0.1), 90.0);
    }

    #[test]
    fn closed_form_values() {
        let r = calibrate_closed_form(100, 100, 0.05).unwrap();
        assert!((r.lambda - 0.40728).abs() < 1e-5);
        let r2 = calibrate_closed_form(100, 200, 0.05).unwrap();
        assert_abs_diff_eq!(r2.lambda.powi(2) - r.lambda.powi(2), 0.02 * 2f64.ln(), epsilon = 1e-14);
        assert!(calibrate_closed_form(100, 1, 1.0).is_err());
    }

    #[test]
    fn gaussian_single_predictor_quantile() {
        let gram = DMatrix::from_element(1, 1, 1.0);
        let q = gaussian_quantile_from_gram(&gram, 100, 1.0, 0.05, 200_000, 1).unwrap();
        assert!((q - 0.195_996_4).abs() < 0.003, "{q}");
    }

    #[test]
    fn nuisance_mismatch_rejected() {
        let d = toy(&[1.0, -1.0, 1.0], &[0.0, 1.0, 2.0]);
        let r = calibrate_mc_with(&FamilySpec::gaussian(), &d, 0.05, 100, 1, Nuisance::Mean(1.0));
        assert!(r.is_err());
        assert!(calibrate_mc(&FamilySpec::gaussian(), &d, 0.05, 50, 1).is_err());
    }
}
