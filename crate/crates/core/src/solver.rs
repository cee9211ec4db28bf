//! Penalized fits of the composite objective and unpenalized refits.
//!
//! The smooth part is handled by accelerated proximal gradient with
//! backtracking and a restart whenever the objective would increase, which
//! keeps the iterates monotone. SCAD fits start from the L1 solution at the
//! same level and continue with plain (non-accelerated) proximal steps, which
//! stay in the basin of that start. The Laplace loss is piecewise linear and
//! is solved exactly as a linear program instead.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PicError, Result};
use crate::lad::fit_lad;
use crate::losses::{null_mle_y, CompositeLoss};
use crate::model::{Dataset, Family, FitResult, PenaltySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    /// Fallback first step when the Barzilai-Borwein estimate is unusable.
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub warm_start: Option<DVector<f64>>,
    /// Keep the objective after every accepted iteration.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 10_000,
            tol: 1e-9,
            step_init: 1.0,
            backtrack_factor: 0.5,
            warm_start: None,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(PicError::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(PicError::InvalidArgument("tol must be positive".into()));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(PicError::InvalidArgument("step_init must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(PicError::InvalidArgument("backtrack_factor must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Penalty applied with a given step: `prox` of `lambda_step * rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxOp {
    pub penalty: PenaltySpec,
    pub lambda_step: f64,
}

impl ProxOp {
    pub fn apply(&self, z: f64) -> f64 {
        prox(&self.penalty, z, self.lambda_step)
    }
}

fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// SCAD penalty `p_lambda(|b|)`; its slope at zero is `lambda`.
pub fn scad_value(b: f64, lambda: f64, a: f64) -> f64 {
    let t = b.abs();
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        -(t * t - 2.0 * a * lambda * t + lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * lambda * lambda / 2.0
    }
}

/// `lambda * C(beta)` for a continuous penalty.
pub fn penalty_value(penalty: &PenaltySpec, beta: &DVector<f64>, lambda: f64) -> f64 {
    match *penalty {
        PenaltySpec::L1 => lambda * beta.iter().map(|b| b.abs()).sum::<f64>(),
        PenaltySpec::Scad { a } => beta.iter().map(|&b| scad_value(b, lambda, a)).sum(),
        PenaltySpec::L0Forward => {
            lambda * beta.iter().filter(|b| **b != 0.0).count() as f64
        }
    }
}

/// Unit-step proximal map with threshold `t`: the minimizer of
/// `(u - z)^2 / 2 + rho_t(u)`.
pub fn prox(penalty: &PenaltySpec, z: f64, t: f64) -> f64 {
    prox_step(penalty, z, 1.0, t)
}

/// Global minimizer of `(u - z)^2 / 2 + step * p_lambda(|u|)`.
pub fn prox_step(penalty: &PenaltySpec, z: f64, step: f64, lambda: f64) -> f64 {
    match *penalty {
        PenaltySpec::L1 => soft(z, step * lambda),
        PenaltySpec::Scad { a } => scad_prox(z, step, lambda, a),
        PenaltySpec::L0Forward => {
            // hard threshold
            if z * z > 2.0 * step * lambda {
                z
            } else {
                0.0
            }
        }
    }
}

fn scad_prox(z: f64, step: f64, lambda: f64, a: f64) -> f64 {
    if lambda == 0.0 || step == 0.0 {
        return z;
    }
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    let w = z.abs();
    let h = |u: f64| 0.5 * (u - w).powi(2) + step * scad_value(u, lambda, a);
    // best point in each of the three pieces; the overall minimizer is among them
    let mut cands = [0.0; 4];
    cands[0] = (w - step * lambda).clamp(0.0, lambda);
    let curv = 1.0 - step / (a - 1.0);
    if curv > 0.0 {
        cands[1] = (((a - 1.0) * w - step * a * lambda) / (a - 1.0 - step)).clamp(lambda, a * lambda);
        cands[2] = cands[1];
    } else {
        cands[1] = lambda;
        cands[2] = a * lambda;
    }
    cands[3] = w.max(a * lambda);
    let mut best = cands[0];
    let mut best_h = h(best);
    for &u in &cands[1..] {
        let hu = h(u);
        if hu < best_h {
            best = u;
            best_h = hu;
        }
    }
    sign * best
}

/// `b0 + X beta`, touching only the nonzero coefficients.
fn sparse_eta(x: &DMatrix<f64>, b0: f64, beta: &DVector<f64>, out: &mut DVector<f64>) {
    out.fill(b0);
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            out.axpy(b, &x.column(j), 1.0);
        }
    }
}

struct Problem<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [f64],
    cl: CompositeLoss,
    penalty: PenaltySpec,
    lambda: f64,
    y_norm_sq: f64,
}

struct Smooth {
    value: f64,
    sigma: Option<f64>,
}

impl Problem<'_> {
    /// Smooth part; anything outside the domain evaluates to `+inf`.
    fn smooth(&self, eta: &DVector<f64>, grad: Option<&mut DVector<f64>>) -> Result<Smooth> {
        match self.cl.eval(eta.as_slice(), self.y, None, grad.map(|g| g.as_mut_slice())) {
            Ok(ev) => Ok(Smooth { value: ev.value, sigma: ev.sigma }),
            Err(PicError::DomainViolation { .. }) | Err(PicError::DegenerateResponse(_)) => {
                Ok(Smooth { value: f64::INFINITY, sigma: None })
            }
            Err(e) => Err(e),
        }
    }

    fn perfect_fit(&self, eta: &DVector<f64>) -> bool {
        if !self.cl.is_root_type() {
            return false;
        }
        let rss: f64 = eta.iter().zip(self.y).map(|(e, y)| (y - e).powi(2)).sum();
        rss < 1e-12 * self.y_norm_sq
    }
}

struct Outcome {
    b0: f64,
    beta: DVector<f64>,
    objective: f64,
    sigma: Option<f64>,
    iterations: usize,
    converged: bool,
    exact_fit: bool,
    trace: Option<Vec<f64>>,
}

fn dot(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b)
}

/// Proximal gradient from `(b0_start, beta_start)`. With `accelerate` the
/// iteration uses momentum, a Barzilai-Borwein first step and step growth;
/// without it the step only shrinks, so the iterates stay in the basin of the
/// starting point (used for the nonconvex SCAD stage).
fn prox_grad(
    pb: &Problem<'_>,
    b0_start: f64,
    beta_start: DVector<f64>,
    cfg: &SolverConfig,
    accelerate: bool,
) -> Result<Outcome> {
    let (n, p) = pb.x.shape();
    let mut x_b0 = b0_start;
    let mut x_beta = beta_start;
    let mut eta_x = DVector::zeros(n);
    sparse_eta(pb.x, x_b0, &x_beta, &mut eta_x);
    let start = pb.smooth(&eta_x, None)?;
    if !start.value.is_finite() {
        return Err(PicError::DomainViolation {
            row: 0,
            value: eta_x[0],
            domain: pb.cl.domain().to_string(),
        });
    }
    let mut f_obj = start.value + penalty_value(&pb.penalty, &x_beta, pb.lambda);
    let mut sigma = start.sigma;
    let mut trace = cfg.record_trace.then(|| vec![f_obj]);
    if pb.perfect_fit(&eta_x) {
        return Ok(Outcome {
            b0: x_b0,
            beta: x_beta,
            objective: f_obj,
            sigma,
            iterations: 0,
            converged: true,
            exact_fit: true,
            trace,
        });
    }

    let mut y_b0 = x_b0;
    let mut y_beta = x_beta.clone();
    let mut eta_y = eta_x.clone();
    let mut t_mom = 1.0f64;
    let mut g = DVector::zeros(n);
    let mut eta_z = DVector::zeros(n);
    let mut z_beta = DVector::zeros(p);

    // Barzilai-Borwein guess from a plain gradient step at the start
    let mut step = if !accelerate {
        cfg.step_init
    } else {
        let f0 = pb.smooth(&eta_y, Some(&mut g))?;
        let g0_b0 = g.sum();
        let g0 = pb.x.tr_mul(&g);
        let trial_beta = &y_beta - &g0 * cfg.step_init;
        let mut eta_t = DVector::zeros(n);
        eta_t.copy_from(&(pb.x * &trial_beta));
        eta_t.add_scalar_mut(y_b0 - cfg.step_init * g0_b0);
        let mut g1 = DVector::zeros(n);
        let f1 = pb.smooth(&eta_t, Some(&mut g1))?;
        let mut bb = cfg.step_init;
        if f0.value.is_finite() && f1.value.is_finite() {
            let d_b0 = g1.sum() - g0_b0;
            let d_beta = pb.x.tr_mul(&g1) - &g0;
            let ss = cfg.step_init.powi(2) * (g0.norm_squared() + g0_b0 * g0_b0);
            let sy = -cfg.step_init * (dot(&g0, &d_beta) + g0_b0 * d_b0);
            if sy > 0.0 && (ss / sy).is_finite() {
                bb = ss / sy;
            }
        }
        bb
    };

    let mut converged = false;
    let mut exact_fit = false;
    let mut iterations = 0;
    let mut momentum_active = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let fy = pb.smooth(&eta_y, Some(&mut g))?;
        let gy_b0 = g.sum();
        let gy = pb.x.tr_mul(&g);

        // backtracking on the quadratic upper model
        if accelerate {
            step /= cfg.backtrack_factor;
        }
        let (z_b0, fz) = loop {
            let z_b0 = y_b0 - step * gy_b0;
            for j in 0..p {
                z_beta[j] = prox_step(&pb.penalty, y_beta[j] - step * gy[j], step, pb.lambda);
            }
            sparse_eta(pb.x, z_b0, &z_beta, &mut eta_z);
            let fz = pb.smooth(&eta_z, None)?;
            let d_b0 = z_b0 - y_b0;
            let diff = &z_beta - &y_beta;
            let model = fy.value
                + gy_b0 * d_b0
                + dot(&gy, &diff)
                + (d_b0 * d_b0 + diff.norm_squared()) / (2.0 * step);
            if fz.value <= model + 1e-12 * fy.value.abs() {
                break (z_b0, fz);
            }
            step *= cfg.backtrack_factor;
            if step < 1e-30 {
                break (z_b0, Smooth { value: f64::INFINITY, sigma: None });
            }
        };
        if !fz.value.is_finite() {
            if momentum_active {
                y_b0 = x_b0;
                y_beta.copy_from(&x_beta);
                eta_y.copy_from(&eta_x);
                t_mom = 1.0;
                momentum_active = false;
                continue;
            }
            break;
        }
        let f_new = fz.value + penalty_value(&pb.penalty, &z_beta, pb.lambda);
        if f_new > f_obj {
            if momentum_active {
                // restart from the last iterate without momentum
                y_b0 = x_b0;
                y_beta.copy_from(&x_beta);
                eta_y.copy_from(&eta_x);
                t_mom = 1.0;
                momentum_active = false;
                continue;
            }
            // a plain step cannot increase the objective beyond rounding
            converged = (f_new - f_obj) <= 1e-12 * f_obj.abs().max(1e-300);
            break;
        }
        let change = f_obj - f_new;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        let mom = if accelerate { (t_mom - 1.0) / t_next } else { 0.0 };
        t_mom = t_next;
        // y = z + mom (z - x), eta likewise
        y_b0 = z_b0 + mom * (z_b0 - x_b0);
        for j in 0..p {
            y_beta[j] = z_beta[j] + mom * (z_beta[j] - x_beta[j]);
        }
        for i in 0..n {
            eta_y[i] = eta_z[i] + mom * (eta_z[i] - eta_x[i]);
        }
        momentum_active = mom != 0.0;
        x_b0 = z_b0;
        x_beta.copy_from(&z_beta);
        eta_x.copy_from(&eta_z);
        f_obj = f_new;
        sigma = fz.sigma;
        if let Some(tr) = trace.as_mut() {
            tr.push(f_obj);
        }
        if pb.perfect_fit(&eta_x) {
            exact_fit = true;
            converged = true;
            break;
        }
        if change <= cfg.tol * f_obj.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    Ok(Outcome {
        b0: x_b0,
        beta: x_beta,
        objective: f_obj,
        sigma,
        iterations,
        converged,
        exact_fit,
        trace,
    })
}

fn outcome_to_fit(o: Outcome) -> FitResult {
    let mut fit = FitResult::new(o.b0, o.beta);
    fit.sigma_hat = o.sigma;
    fit.objective = o.objective;
    fit.iterations = o.iterations;
    fit.converged = o.converged;
    fit.exact_fit = o.exact_fit;
    fit.trace = o.trace;
    if o.exact_fit {
        fit.warnings.push("residuals vanished; the square-root loss is nonsmooth at a perfect fit".into());
    }
    if !o.converged {
        fit.warnings.push(format!("no convergence within {} iterations", o.iterations));
    }
    fit
}

/// Laplace loss: exact LP solution, with local linear approximation for SCAD.
fn fit_laplace(
    x: &DMatrix<f64>,
    y: &[f64],
    penalty: &PenaltySpec,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    let p = x.ncols();
    let ones = vec![1.0; p];
    let (mut b0, mut beta) = fit_lad(x, y, &ones, lambda)?;
    let mut iterations = 1;
    if let PenaltySpec::Scad { a } = *penalty {
        if let Some(w) = &cfg.warm_start {
            beta = w.clone();
        }
        for _ in 0..20 {
            let weights: Vec<f64> = beta
                .iter()
                .map(|b| {
                    let t = b.abs();
                    if t <= lambda {
                        1.0
                    } else {
                        ((a * lambda - t).max(0.0) / ((a - 1.0) * lambda)).max(0.0)
                    }
                })
                .collect();
            let (nb0, nbeta) = fit_lad(x, y, &weights, lambda)?;
            iterations += 1;
            let moved = (&nbeta - &beta).amax() + (nb0 - b0).abs();
            b0 = nb0;
            beta = nbeta;
            if moved < 1e-10 {
                break;
            }
        }
    }
    let n = y.len() as f64;
    let mut eta = DVector::zeros(y.len());
    sparse_eta(x, b0, &beta, &mut eta);
    let loss = eta.iter().zip(y).map(|(e, v)| (v - e).abs()).sum::<f64>() / n;
    let mut fit = FitResult::new(b0, beta);
    fit.objective = loss + penalty_value(penalty, &fit.beta_hat, lambda);
    fit.sigma_hat = Some(loss);
    fit.iterations = iterations;
    fit.converged = true;
    Ok(fit)
}

/// Minimizes `L(beta0, beta) + lambda * C(beta)` with the intercept (and any
/// scale) unpenalized.
pub fn fit_pic(
    cl: &CompositeLoss,
    penalty: &PenaltySpec,
    lambda: f64,
    d: &Dataset,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(PicError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if matches!(penalty, PenaltySpec::L0Forward) {
        return Err(PicError::InvalidArgument(
            "the l0 penalty is fitted by forward selection, not by the continuous solver".into(),
        ));
    }
    if !d.is_standardized() {
        return Err(PicError::InvalidArgument("fit_pic needs a standardized design".into()));
    }
    if let Some(w) = &cfg.warm_start {
        if w.len() != d.p() {
            return Err(PicError::Dimension(format!(
                "warm start has {} entries, design has {} columns",
                w.len(),
                d.p()
            )));
        }
    }
    let y = d.y().as_slice();
    // joint minimization over sigma equals minimizing the profiled loss
    let cl = CompositeLoss::new(*cl.family());
    cl.validate_response(y)?;
    let null = null_mle_y(cl.family(), y)?;
    if cl.family().family() == Family::Laplace {
        return fit_laplace(d.x(), y, penalty, lambda, cfg);
    }
    let pb = Problem {
        x: d.x(),
        y,
        cl,
        penalty: *penalty,
        lambda,
        y_norm_sq: d.y().norm_squared(),
    };
    match (*penalty, &cfg.warm_start) {
        (PenaltySpec::Scad { .. }, None) => {
            let l1 = Problem { penalty: PenaltySpec::L1, ..pb };
            let first = prox_grad(&l1, null.beta0_hat, DVector::zeros(d.p()), cfg, true)?;
            let pb = Problem { penalty: *penalty, ..l1 };
            let used = first.iterations;
            let mut out = prox_grad(&pb, first.b0, first.beta, cfg, false)?;
            out.iterations += used;
            Ok(outcome_to_fit(out))
        }
        (_, start) => {
            let beta0 = start.clone().unwrap_or_else(|| DVector::zeros(d.p()));
            let convex = matches!(penalty, PenaltySpec::L1);
            Ok(outcome_to_fit(prox_grad(&pb, null.beta0_hat, beta0, cfg, convex)?))
        }
    }
}

/// Unpenalized fit restricted to `support`, embedded back into `p` dimensions.
pub fn refit_support(cl: &CompositeLoss, d: &Dataset, support: &[usize]) -> Result<FitResult> {
    let n = d.n();
    let p = d.p();
    let limit = n.saturating_sub(2);
    if support.len() > limit {
        return Err(PicError::RefitUnderdetermined { support: support.len(), limit });
    }
    if let Some(&j) = support.iter().find(|&&j| j >= p) {
        return Err(PicError::Dimension(format!("support index {j} out of range for p = {p}")));
    }
    let cl = CompositeLoss::new(*cl.family());
    let y = d.y().as_slice();
    cl.validate_response(y)?;
    let null = null_mle_y(cl.family(), y)?;
    let xs = d.x().select_columns(support);
    let k = support.len();

    let (b0, bs, converged, iterations, warnings) = if k == 0 {
        (null.beta0_hat, DVector::zeros(0), true, 0, Vec::new())
    } else if cl.family().is_gaussian_like() {
        let mut a = DMatrix::from_element(n, k + 1, 1.0);
        a.view_mut((0, 1), (n, k)).copy_from(&xs);
        let svd = a.svd(true, true);
        let coef = svd
            .solve(d.y(), 1e-12)
            .map_err(|e| PicError::InvalidArgument(format!("least squares failed: {e}")))?;
        (coef[0], coef.rows(1, k).into_owned(), true, 1, Vec::new())
    } else if cl.family().family() == Family::Laplace {
        let (b0, b) = fit_lad(&xs, y, &vec![0.0; k], 0.0)?;
        (b0, b, true, 1, Vec::new())
    } else {
        let pb = Problem {
            x: &xs,
            y,
            cl,
            penalty: PenaltySpec::L1,
            lambda: 0.0,
            y_norm_sq: d.y().norm_squared(),
        };
        let o = prox_grad(&pb, null.beta0_hat, DVector::zeros(k), &SolverConfig::default(), true)?;
        let mut w = Vec::new();
        if !o.converged {
            w.push("refit did not converge (separation or a flat direction)".to_string());
        }
        (o.b0, o.beta, o.converged, o.iterations, w)
    };

    let mut beta = DVector::zeros(p);
    for (idx, &j) in support.iter().enumerate() {
        beta[j] = bs[idx];
    }
    let eta = d.linear_predictor(b0, &beta);
    let ev = cl.eval(eta.as_slice(), y, None, None)?;
    let mut fit = FitResult::new(b0, beta.clone());
    fit.support_hat = support.to_vec();
    fit.support_hat.sort_unstable();
    fit.objective = ev.value;
    fit.sigma_hat = ev.sigma;
    fit.converged = converged;
    fit.iterations = iterations;
    fit.warnings = warnings;
    fit.refit_beta0 = Some(b0);
    fit.refit_beta = Some(beta);
    Ok(fit)
}

/// Penalized fit followed by a refit on the selected support.
pub fn fit_and_refit(
    cl: &CompositeLoss,
    penalty: &PenaltySpec,
    lambda: f64,
    d: &Dataset,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    let mut fit = fit_pic(cl, penalty, lambda, d, cfg)?;
    let refit = refit_support(cl, d, &fit.support_hat)?;
    fit.refit_beta0 = refit.refit_beta0;
    fit.refit_beta = refit.refit_beta;
    fit.warnings.extend(refit.warnings);
    Ok(fit)
}
