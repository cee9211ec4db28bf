//! Composite losses `phi(l_n(g(eta), sigma))` for every supported family,
//! their gradients in the linear predictor, and intercept-only (null) fits.
//!
//! Everything is expressed in terms of `eta = beta0 + X beta`; gradients with
//! respect to `(beta0, beta)` follow by one reduction and one `X^T` product.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{PicError, Result};
use crate::model::{Dataset, Family, FamilySpec};

/// Interval of admissible linear-predictor values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Domain {
    pub const REAL: Domain =
        Domain { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_open: true, hi_open: true };

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below && !v.is_nan()
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// A family's composite loss and how its scale parameter is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeLoss {
    family: FamilySpec,
    domain_g: Domain,
    profile_sigma: bool,
}

/// Intercept-only fit under `beta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullMle {
    /// Fitted location or mean on the family's natural scale.
    pub theta_hat: f64,
    /// Intercept on the linear-predictor scale.
    pub beta0_hat: f64,
    pub sigma_hat: Option<f64>,
}

/// Value of the composite loss, and the scale used when it was profiled.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Eval {
    pub value: f64,
    pub sigma: Option<f64>,
}

impl CompositeLoss {
    /// Loss with the scale parameter (if any) profiled out.
    pub fn new(family: FamilySpec) -> Self {
        let domain_g = match family.family() {
            Family::BernoulliNll => Domain {
                lo: -std::f64::consts::FRAC_PI_2,
                hi: std::f64::consts::FRAC_PI_2,
                lo_open: false,
                hi_open: false,
            },
            Family::PoissonNll => {
                Domain { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true }
            }
            _ => Domain::REAL,
        };
        CompositeLoss { family, domain_g, profile_sigma: true }
    }

    /// Loss evaluated at a caller-supplied scale. Only the families with an
    /// explicit scale parameter (Gaussian NLL, Gumbel) accept this.
    pub fn with_explicit_sigma(family: FamilySpec) -> Result<Self> {
        let mut cl = CompositeLoss::new(family);
        if !cl.has_scale_parameter() {
            return Err(PicError::InvalidArgument(format!(
                "family {family} has no explicit scale parameter"
            )));
        }
        cl.profile_sigma = false;
        Ok(cl)
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }
    pub fn domain(&self) -> Domain {
        self.domain_g
    }
    pub fn profile_sigma(&self) -> bool {
        self.profile_sigma
    }

    pub fn has_scale_parameter(&self) -> bool {
        matches!(self.family.family(), Family::GaussianNll | Family::GumbelNll)
    }

    /// Losses whose outer transform is a root of a power mean; they become
    /// nonsmooth at a perfect fit.
    pub(crate) fn is_root_type(&self) -> bool {
        matches!(
            self.family.family(),
            Family::GaussianMse | Family::GaussianNll | Family::Subbotin { .. }
        )
    }

    pub(crate) fn validate_sigma(&self, sigma: Option<f64>) -> Result<()> {
        match (self.profile_sigma, sigma) {
            (true, None) => Ok(()),
            (true, Some(_)) => Err(PicError::InvalidArgument(
                "sigma is profiled for this loss and must not be supplied".into(),
            )),
            (false, None) => {
                Err(PicError::InvalidArgument("this loss requires an explicit sigma".into()))
            }
            (false, Some(s)) if s > 0.0 && s.is_finite() => Ok(()),
            (false, Some(s)) => {
                Err(PicError::InvalidArgument(format!("sigma must be positive, got {s}")))
            }
        }
    }

    /// Checks that the response is admissible for the family.
    pub fn validate_response(&self, y: &[f64]) -> Result<()> {
        let bad = |i: usize, msg: &str| {
            Err(PicError::InvalidArgument(format!("response row {i}: {msg}")))
        };
        match self.family.family() {
            Family::BernoulliNll | Family::BernoulliWsl => {
                if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return bad(i, "binary families need 0/1 responses");
                }
            }
            Family::PoissonNll | Family::PoissonWsl => {
                if let Some(i) = y.iter().position(|&v| v < 0.0) {
                    return bad(i, "count families need nonnegative responses");
                }
            }
            Family::ExponentialNll => {
                if let Some(i) = y.iter().position(|&v| v < 0.0) {
                    return bad(i, "exponential family needs nonnegative responses");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn check_domain(&self, eta: &[f64]) -> Result<()> {
        if self.domain_g.is_real_line() {
            return Ok(());
        }
        match eta.iter().position(|&e| !self.domain_g.contains(e)) {
            Some(row) => Err(PicError::DomainViolation {
                row,
                value: eta[row],
                domain: self.domain_g.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Evaluates the loss at linear predictor `eta`; when `grad` is given it
    /// receives `dL/d eta_i`. The value may be `+inf` inside the domain (e.g.
    /// a Bernoulli mean of exactly 0 for a success).
    pub(crate) fn eval(
        &self,
        eta: &[f64],
        y: &[f64],
        sigma: Option<f64>,
        grad: Option<&mut [f64]>,
    ) -> Result<Eval> {
        self.check_domain(eta)?;
        let n = eta.len() as f64;
        let fam = self.family.family();
        match fam {
            Family::GaussianMse => Ok(Eval { value: root_mean_square(eta, y, 1.0, grad), sigma: None }),
            Family::Subbotin { r } if r == 2.0 => {
                Ok(Eval { value: root_mean_square(eta, y, 1.0, grad), sigma: None })
            }
            Family::GaussianNll => match sigma {
                None => {
                    let k = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
                    let v = root_mean_square(eta, y, k, grad);
                    Ok(Eval { value: v, sigma: Some(v / k) })
                }
                Some(s) => {
                    let rss: f64 = eta.iter().zip(y).map(|(e, yi)| (yi - e).powi(2)).sum();
                    let ln = s.ln()
                        + 0.5 * (2.0 * std::f64::consts::PI).ln()
                        + rss / (2.0 * n * s * s);
                    let v = ln.exp();
                    if let Some(g) = grad {
                        for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                            *gi = -v * (yi - e) / (n * s * s);
                        }
                    }
                    Ok(Eval { value: v, sigma: Some(s) })
                }
            },
            Family::Subbotin { r } => {
                let mean_pow: f64 =
                    eta.iter().zip(y).map(|(e, yi)| (yi - e).abs().powf(r)).sum::<f64>() / n;
                let v = mean_pow.powf(1.0 / r);
                if let Some(g) = grad {
                    if mean_pow == 0.0 {
                        g.iter_mut().for_each(|gi| *gi = 0.0);
                    } else {
                        let k = mean_pow.powf(1.0 / r - 1.0) / n;
                        for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                            let res = yi - e;
                            *gi = -k * res.abs().powf(r - 1.0) * sgn(res);
                        }
                    }
                }
                Ok(Eval { value: v, sigma: Some(v) })
            }
            Family::Laplace => {
                let v = eta.iter().zip(y).map(|(e, yi)| (yi - e).abs()).sum::<f64>() / n;
                if let Some(g) = grad {
                    for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                        *gi = -sgn(yi - e) / n;
                    }
                }
                Ok(Eval { value: v, sigma: Some(v) })
            }
            Family::GumbelNll => {
                let res: Vec<f64> = eta.iter().zip(y).map(|(e, yi)| yi - e).collect();
                let tau = match sigma {
                    Some(s) => 1.0 / s,
                    None => gumbel_profile_tau(&res)?,
                };
                let mean_term =
                    res.iter().map(|&r| -r * tau + (r * tau).exp()).sum::<f64>() / n;
                let v = (mean_term - tau.ln()).exp();
                if let Some(g) = grad {
                    for (gi, &r) in g.iter_mut().zip(&res) {
                        *gi = v * tau * (1.0 - (r * tau).exp()) / n;
                    }
                }
                Ok(Eval { value: v, sigma: Some(1.0 / tau) })
            }
            Family::BernoulliNll => {
                let mut v = 0.0;
                for (e, yi) in eta.iter().zip(y) {
                    let mu = 0.5 * (1.0 + e.sin());
                    v -= if *yi == 1.0 { mu.ln() } else { (1.0 - mu).ln() };
                }
                if let Some(g) = grad {
                    for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                        let (s, c) = e.sin_cos();
                        *gi = if *yi == 1.0 { -c / (1.0 + s) } else { c / (1.0 - s) } / n;
                    }
                }
                Ok(Eval { value: v / n, sigma: None })
            }
            Family::BernoulliWsl => {
                let mut v = 0.0;
                for (e, yi) in eta.iter().zip(y) {
                    v += 2.0 * yi * (-e / 2.0).exp() + 2.0 * (1.0 - yi) * (e / 2.0).exp();
                }
                if let Some(g) = grad {
                    for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                        *gi = (-yi * (-e / 2.0).exp() + (1.0 - yi) * (e / 2.0).exp()) / n;
                    }
                }
                Ok(Eval { value: v / n, sigma: None })
            }
            Family::PoissonNll => {
                let mut v = 0.0;
                for (u, yi) in eta.iter().zip(y) {
                    let mu = u * u / 4.0;
                    v += mu - if *yi > 0.0 { yi * mu.ln() } else { 0.0 };
                }
                if let Some(g) = grad {
                    for ((gi, u), yi) in g.iter_mut().zip(eta).zip(y) {
                        let mu = u * u / 4.0;
                        *gi = (1.0 - yi / mu) * (u / 2.0) / n;
                    }
                }
                Ok(Eval { value: v / n, sigma: None })
            }
            Family::PoissonWsl => {
                let mut v = 0.0;
                for (e, yi) in eta.iter().zip(y) {
                    v += 2.0 * yi * (-e / 2.0).exp() + 2.0 * (e / 2.0).exp();
                }
                if let Some(g) = grad {
                    for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                        *gi = (-yi * (-e / 2.0).exp() + (e / 2.0).exp()) / n;
                    }
                }
                Ok(Eval { value: v / n, sigma: None })
            }
            Family::ExponentialNll => {
                let mut v = 0.0;
                for (e, yi) in eta.iter().zip(y) {
                    v += e + yi * (-e).exp();
                }
                if let Some(g) = grad {
                    for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                        *gi = (1.0 - yi * (-e).exp()) / n;
                    }
                }
                Ok(Eval { value: v / n, sigma: None })
            }
        }
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `k * sqrt(mean((y - eta)^2))` and its gradient; zero gradient at a perfect fit.
fn root_mean_square(eta: &[f64], y: &[f64], k: f64, grad: Option<&mut [f64]>) -> f64 {
    let n = eta.len() as f64;
    let rss: f64 = eta.iter().zip(y).map(|(e, yi)| (yi - e).powi(2)).sum();
    let rms = (rss / n).sqrt();
    if let Some(g) = grad {
        if rss == 0.0 {
            g.iter_mut().for_each(|gi| *gi = 0.0);
        } else {
            let scale = k / (n * rms);
            for ((gi, e), yi) in g.iter_mut().zip(eta).zip(y) {
                *gi = -scale * (yi - e);
            }
        }
    }
    k * rms
}

/// Minimizes `-ln(tau) + mean(-r tau + exp(r tau))` over `tau = 1 / sigma > 0`.
/// The objective is strictly convex in `tau`, so a bracketed Newton iteration
/// converges to the unique root of its derivative.
pub(crate) fn gumbel_profile_tau(res: &[f64]) -> Result<f64> {
    let n = res.len() as f64;
    let ms = res.iter().map(|r| r * r).sum::<f64>() / n;
    if ms == 0.0 || !ms.is_finite() {
        return Err(PicError::DegenerateResponse(
            "residuals are identically zero; Gumbel scale is not identifiable".into(),
        ));
    }
    let d1 = |t: f64| -1.0 / t + res.iter().map(|&r| r * ((r * t).exp() - 1.0)).sum::<f64>() / n;
    let d2 = |t: f64| 1.0 / (t * t) + res.iter().map(|&r| r * r * (r * t).exp()).sum::<f64>() / n;
    let t0 = std::f64::consts::PI / (6.0 * ms).sqrt();
    bracketed_newton(t0, d1, d2, true)
}

/// Root of an increasing function `f` on `(0, inf)` (when `positive`) or on the
/// real line, using Newton steps safeguarded by bisection.
fn bracketed_newton(
    x0: f64,
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
    positive: bool,
) -> Result<f64> {
    let (mut lo, mut hi) = (x0, x0);
    let mut guard = 0;
    while !(f(lo) < 0.0) {
        lo = if positive { lo / 2.0 } else { lo - (hi - lo).abs().max(1.0) };
        guard += 1;
        if guard > 2000 {
            return Err(PicError::Calibration("failed to bracket a root".into()));
        }
    }
    guard = 0;
    while !(f(hi) > 0.0) {
        hi = if positive { hi * 2.0 } else { hi + (hi - lo).abs().max(1.0) };
        guard += 1;
        if guard > 2000 {
            return Err(PicError::Calibration("failed to bracket a root".into()));
        }
    }
    newton_in_bracket(lo, hi, 0.5 * (lo + hi), f, fprime)
}

/// Safeguarded Newton for an increasing `f` with `f(lo) < 0 < f(hi)`.
fn newton_in_bracket(
    mut lo: f64,
    mut hi: f64,
    start: f64,
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut x = start.clamp(lo, hi);
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = fprime(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
        {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

fn eta_of(beta0: f64, beta: &DVector<f64>, d: &Dataset) -> Result<DVector<f64>> {
    if beta.len() != d.p() {
        return Err(PicError::Dimension(format!(
            "beta has {} entries, design has {} columns",
            beta.len(),
            d.p()
        )));
    }
    Ok(d.linear_predictor(beta0, beta))
}

/// Composite loss at `(beta0, beta)` (and `sigma` when the loss takes it explicitly).
pub fn loss_value(
    cl: &CompositeLoss,
    beta0: f64,
    beta: &DVector<f64>,
    sigma: Option<f64>,
    d: &Dataset,
) -> Result<f64> {
    cl.validate_sigma(sigma)?;
    cl.validate_response(d.y().as_slice())?;
    let eta = eta_of(beta0, beta, d)?;
    Ok(cl.eval(eta.as_slice(), d.y().as_slice(), sigma, None)?.value)
}

/// Gradient of [`loss_value`] with respect to `(beta0, beta)`.
pub fn loss_gradient(
    cl: &CompositeLoss,
    beta0: f64,
    beta: &DVector<f64>,
    sigma: Option<f64>,
    d: &Dataset,
) -> Result<(f64, DVector<f64>)> {
    cl.validate_sigma(sigma)?;
    cl.validate_response(d.y().as_slice())?;
    let eta = eta_of(beta0, beta, d)?;
    let mut g = DVector::zeros(d.n());
    cl.eval(eta.as_slice(), d.y().as_slice(), sigma, Some(g.as_mut_slice()))?;
    Ok((g.sum(), d.x().tr_mul(&g)))
}

/// Derivative of the composite loss in the explicit scale `sigma`.
pub fn scale_score(
    cl: &CompositeLoss,
    beta0: f64,
    beta: &DVector<f64>,
    sigma: f64,
    d: &Dataset,
) -> Result<f64> {
    if cl.profile_sigma {
        return Err(PicError::InvalidArgument("scale score needs an explicit-sigma loss".into()));
    }
    cl.validate_sigma(Some(sigma))?;
    let eta = eta_of(beta0, beta, d)?;
    let y = d.y().as_slice();
    let n = d.n() as f64;
    let v = cl.eval(eta.as_slice(), y, Some(sigma), None)?.value;
    // d/dsigma of exp(l_n) = exp(l_n) * dl_n/dsigma
    let dl = match cl.family.family() {
        Family::GaussianNll => {
            let rss: f64 = eta.iter().zip(y).map(|(e, yi)| (yi - e).powi(2)).sum();
            1.0 / sigma - rss / (n * sigma.powi(3))
        }
        Family::GumbelNll => {
            let s2 = sigma * sigma;
            1.0 / sigma
                + eta
                    .iter()
                    .zip(y)
                    .map(|(e, yi)| {
                        let r = yi - e;
                        r / s2 - r / s2 * (r / sigma).exp()
                    })
                    .sum::<f64>()
                    / n
        }
        _ => unreachable!("explicit sigma only for scale families"),
    };
    Ok(v * dl)
}

pub(crate) fn median(y: &[f64]) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Location minimizing `sum |y_i - theta|^r`, `r > 1`.
pub(crate) fn subbotin_location(y: &[f64], r: f64) -> Result<f64> {
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(lo);
    }
    if r == 2.0 {
        return Ok(y.iter().sum::<f64>() / y.len() as f64);
    }
    // derivative of the objective (up to the factor r), increasing in theta
    let f = |t: f64| -y.iter().map(|&v| sgn(v - t) * (v - t).abs().powf(r - 1.0)).sum::<f64>();
    let fp = |t: f64| (r - 1.0) * y.iter().map(|&v| (v - t).abs().powf(r - 2.0)).sum::<f64>();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    newton_in_bracket(lo, hi, mean, f, fp)
}

/// Maximum likelihood fit of a minimum-type Gumbel sample: returns `(mu, sigma)`.
pub(crate) fn gumbel_mle(y: &[f64]) -> Result<(f64, f64)> {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = ymax - ybar;
    if !(spread > 0.0) {
        return Err(PicError::DegenerateResponse("constant response".into()));
    }
    // softmax-weighted moments of y with weights exp(y / sigma)
    let moments = |s: f64| {
        let (mut w, mut wy, mut wyy) = (0.0, 0.0, 0.0);
        for &v in y {
            let e = ((v - ymax) / s).exp();
            w += e;
            wy += e * v;
            wyy += e * v * v;
        }
        let m = wy / w;
        (w, m, wyy / w - m * m)
    };
    // sigma solves wmean(sigma) - ybar - sigma = 0; the left side decreases in sigma
    let g = |s: f64| -(moments(s).1 - ybar - s);
    let gp = |s: f64| {
        let (_, _, var) = moments(s);
        var / (s * s) + 1.0
    };
    let mut lo = spread * 1e-3;
    let mut guard = 0;
    while g(lo) >= 0.0 {
        lo /= 4.0;
        guard += 1;
        if guard > 500 {
            return Err(PicError::Calibration("Gumbel scale bracket failed".into()));
        }
    }
    let hi = spread;
    let sigma = if g(hi) <= 0.0 { hi } else { newton_in_bracket(lo, hi, 0.5 * (lo + hi), g, gp)? };
    let (w, _, _) = moments(sigma);
    let mu = ymax + sigma * (w / n).ln();
    Ok((mu, sigma))
}

/// Intercept-only fit from a raw response vector.
pub(crate) fn null_mle_y(family: &FamilySpec, y: &[f64]) -> Result<NullMle> {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let constant = y.iter().all(|&v| v == y[0]);
    let degenerate = |what: &str| Err(PicError::DegenerateResponse(what.to_string()));
    match family.family() {
        Family::GaussianMse | Family::GaussianNll => {
            if constant {
                return degenerate("constant response; the null scale estimate is zero");
            }
            let rss0: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
            Ok(NullMle { theta_hat: ybar, beta0_hat: ybar, sigma_hat: Some((rss0 / n).sqrt()) })
        }
        Family::Subbotin { r } => {
            if constant {
                return degenerate("constant response; the null scale estimate is zero");
            }
            let t = subbotin_location(y, r)?;
            let s = (y.iter().map(|v| (v - t).abs().powf(r)).sum::<f64>() / n).powf(1.0 / r);
            Ok(NullMle { theta_hat: t, beta0_hat: t, sigma_hat: Some(s) })
        }
        Family::Laplace => {
            let m = median(y);
            let s = y.iter().map(|v| (v - m).abs()).sum::<f64>() / n;
            Ok(NullMle { theta_hat: m, beta0_hat: m, sigma_hat: Some(s) })
        }
        Family::GumbelNll => {
            let (mu, sigma) = gumbel_mle(y)?;
            Ok(NullMle { theta_hat: mu, beta0_hat: mu, sigma_hat: Some(sigma) })
        }
        Family::BernoulliNll | Family::BernoulliWsl => {
            if !(ybar > 0.0 && ybar < 1.0) {
                return degenerate("binary response has no variation (mean is 0 or 1)");
            }
            let beta0 = match family.family() {
                Family::BernoulliNll => (2.0 * ybar - 1.0).asin(),
                _ => (ybar / (1.0 - ybar)).ln(),
            };
            Ok(NullMle { theta_hat: ybar, beta0_hat: beta0, sigma_hat: None })
        }
        Family::PoissonNll | Family::PoissonWsl => {
            if !(ybar > 0.0) {
                return degenerate("count response is identically zero");
            }
            let beta0 = match family.family() {
                Family::PoissonNll => 2.0 * ybar.sqrt(),
                _ => ybar.ln(),
            };
            Ok(NullMle { theta_hat: ybar, beta0_hat: beta0, sigma_hat: None })
        }
        Family::ExponentialNll => {
            if !(ybar > 0.0) {
                return degenerate("exponential response has zero mean");
            }
            Ok(NullMle { theta_hat: ybar, beta0_hat: ybar.ln(), sigma_hat: None })
        }
    }
}

/// Intercept-only fit under `beta = 0`.
pub fn null_mle(cl: &CompositeLoss, d: &Dataset) -> Result<NullMle> {
    cl.validate_response(d.y().as_slice())?;
    null_mle_y(&cl.family, d.y().as_slice())
}
