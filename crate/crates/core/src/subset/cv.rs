use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PicError, Result};
use crate::model::{Dataset, FamilySpec, FitResult};
use crate::rng;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvConfig {
    pub folds: usize,
    pub n_lambda: usize,
    /// Orders of magnitude spanned by the grid below `lambda_max`.
    pub decades: f64,
    pub seed: u64,
}

impl CvConfig {
    pub fn new(folds: usize, seed: u64) -> Self {
        CvConfig { folds, n_lambda: 100, decades: 4.0, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvOutcome {
    pub fit: FitResult,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub mean_loss: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Gaussian,
    Logistic,
}

/// Lasso state for `(1/2m) sum w_i (z_i - b0 - x_i beta)^2 + lambda |beta|_1`.
struct Cd<'a> {
    x: &'a DMatrix<f64>,
    b0: f64,
    beta: DVector<f64>,
}

impl Cd<'_> {
    /// Coordinate descent with an active-set loop; `r` holds `z - b0 - X beta`.
    /// Stops when no coordinate moves the weighted objective by more than
    /// about `tol` per sweep.
    fn solve(&mut self, w: &[f64], r: &mut DVector<f64>, lambda: f64, tol: f64) {
        let (n, p) = self.x.shape();
        let m = n as f64;
        let wsum: f64 = w.iter().sum();
        let v: Vec<f64> = (0..p)
            .map(|j| self.x.column(j).iter().zip(w).map(|(a, wi)| wi * a * a).sum::<f64>() / m)
            .collect();
        let sweep = |cd: &mut Cd, r: &mut DVector<f64>, cols: &[usize]| -> f64 {
            let mut max_change = 0.0f64;
            for &j in cols {
                if v[j] == 0.0 {
                    continue;
                }
                let col = cd.x.column(j);
                let grad: f64 = col.iter().zip(r.iter()).zip(w).map(|((a, ri), wi)| wi * a * ri).sum::<f64>() / m;
                let old = cd.beta[j];
                let u = grad + v[j] * old;
                let new = u.signum() * (u.abs() - lambda).max(0.0) / v[j];
                if new != old {
                    r.axpy(old - new, &col, 1.0);
                    cd.beta[j] = new;
                    max_change = max_change.max(v[j] * (new - old).powi(2));
                }
            }
            // intercept
            let shift: f64 = r.iter().zip(w).map(|(ri, wi)| wi * ri).sum::<f64>() / wsum;
            if shift != 0.0 {
                cd.b0 += shift;
                r.add_scalar_mut(-shift);
                max_change = max_change.max(wsum / m * shift * shift);
            }
            max_change
        };
        let all: Vec<usize> = (0..p).collect();
        for _ in 0..1000 {
            let ch = sweep(self, r, &all);
            if ch < tol {
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| self.beta[j] != 0.0).collect();
            for _ in 0..1000 {
                if sweep(self, r, &active) < tol {
                    break;
                }
            }
        }
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Training-fit measure: residual sum of squares or binomial deviance.
fn train_dev(x: &DMatrix<f64>, y: &[f64], kind: Kind, b0: f64, beta: &DVector<f64>) -> f64 {
    held_out_loss(x, y, kind, b0, beta) * y.len() as f64
}

/// Lasso path over `grid` (descending) on `(x, y)`; returns `(b0, beta)` per
/// grid point. Once the fit explains 99.9% of the null deviance, or a step
/// gains less than 1e-5 of it, the remaining points repeat the last solution.
fn lasso_path(x: &DMatrix<f64>, y: &[f64], kind: Kind, grid: &[f64]) -> Vec<(f64, DVector<f64>)> {
    let (n, p) = x.shape();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let scale = (y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / n as f64).sqrt().max(1e-12);
    let mut cd = Cd { x, b0: 0.0, beta: DVector::zeros(p) };
    let mut out = Vec::with_capacity(grid.len());
    let null_b0 = match kind {
        Kind::Gaussian => ybar,
        Kind::Logistic => (ybar / (1.0 - ybar)).ln(),
    };
    cd.b0 = null_b0;
    let null_dev = train_dev(x, y, kind, null_b0, &cd.beta);
    let mut prev_ratio = 0.0;
    let mut r = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let ones = vec![1.0; n];
    for &lam in grid {
        match kind {
            Kind::Gaussian => cd.solve(&ones, &mut r, lam, 1e-9 * scale * scale),
            Kind::Logistic => {
                for _ in 0..50 {
                    let eta = x * &cd.beta;
                    let mut w = vec![0.0; n];
                    let mut z = DVector::zeros(n);
                    for i in 0..n {
                        let mu = sigmoid(eta[i] + cd.b0);
                        w[i] = (mu * (1.0 - mu)).max(1e-5);
                        // working response minus current fit
                        z[i] = (y[i] - mu) / w[i];
                    }
                    let before = (cd.b0, cd.beta.clone());
                    cd.solve(&w, &mut z, lam, 1e-7 * 0.25);
                    let moved = (&cd.beta - &before.1).amax().max((cd.b0 - before.0).abs());
                    if moved < 1e-6 {
                        break;
                    }
                }
            }
        }
        out.push((cd.b0, cd.beta.clone()));
        if null_dev > 0.0 {
            let ratio = 1.0 - train_dev(x, y, kind, cd.b0, &cd.beta) / null_dev;
            if ratio > 0.999 || (out.len() > 1 && ratio - prev_ratio < 1e-5 * ratio) {
                break;
            }
            prev_ratio = ratio;
        }
    }
    while out.len() < grid.len() {
        out.push(out.last().cloned().expect("nonempty grid"));
    }
    out
}

fn held_out_loss(x: &DMatrix<f64>, y: &[f64], kind: Kind, b0: f64, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let n = y.len() as f64;
    match kind {
        Kind::Gaussian => eta.iter().zip(y).map(|(e, v)| (v - b0 - e).powi(2)).sum::<f64>() / n,
        Kind::Logistic => {
            eta.iter()
                .zip(y)
                .map(|(e, v)| {
                    let t = if *v == 1.0 { b0 + e } else { -(b0 + e) };
                    if t > 0.0 { (-t).exp().ln_1p() } else { -t + t.exp().ln_1p() }
                })
                .sum::<f64>()
                / n
        }
    }
}

fn degenerate(y: &[f64], kind: Kind) -> bool {
    match kind {
        Kind::Gaussian => y.iter().all(|v| *v == y[0]),
        Kind::Logistic => {
            let m = y.iter().sum::<f64>() / y.len() as f64;
            m == 0.0 || m == 1.0
        }
    }
}

/// Cross-validated lasso with the full path and held-out losses.
pub fn cv_lasso_detailed(d: &Dataset, family: &FamilySpec, cfg: &CvConfig) -> Result<CvOutcome> {
    let kind = if family.is_gaussian_like() {
        Kind::Gaussian
    } else if family.is_binary() {
        crate::losses::CompositeLoss::new(*family).validate_response(d.y().as_slice())?;
        Kind::Logistic
    } else {
        return Err(PicError::InvalidArgument(format!(
            "cross-validated lasso supports Gaussian and binary families, not {family}"
        )));
    };
    let n = d.n();
    if cfg.folds < 2 || cfg.folds > n {
        return Err(PicError::InvalidArgument(format!(
            "folds must lie in [2, n = {n}], got {}",
            cfg.folds
        )));
    }
    if cfg.n_lambda < 2 || !(cfg.decades > 0.0) {
        return Err(PicError::InvalidArgument("grid needs at least 2 points and a positive span".into()));
    }
    let y = d.y().as_slice();
    if degenerate(y, kind) {
        return Err(PicError::DegenerateResponse("response has no variation".into()));
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let centered = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let lambda_max = d.x().tr_mul(&centered).amax() / n as f64;
    let lambda_max = if lambda_max > 0.0 { lambda_max } else { 1e-12 };
    let k = cfg.n_lambda;
    let grid: Vec<f64> = (0..k)
        .map(|i| lambda_max * 10f64.powf(-cfg.decades * i as f64 / (k - 1) as f64))
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(cfg.seed, &[rng::TAG_FOLDS]));
    let mut fold_of = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_of[i] = pos % cfg.folds;
    }

    let per_fold: Vec<Option<Vec<f64>>> = (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
            let y_tr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            if degenerate(&y_tr, kind) {
                return None;
            }
            let x_tr = d.x().select_rows(&train);
            let x_te = d.x().select_rows(&test);
            let y_te: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let path = lasso_path(&x_tr, &y_tr, kind, &grid);
            Some(path.iter().map(|(b0, b)| held_out_loss(&x_te, &y_te, kind, *b0, b)).collect())
        })
        .collect();

    let mut warnings = Vec::new();
    let mut sums = vec![0.0; k];
    let mut used = 0;
    for (f, losses) in per_fold.iter().enumerate() {
        match losses {
            Some(l) => {
                used += 1;
                for (s, v) in sums.iter_mut().zip(l) {
                    *s += v;
                }
            }
            None => warnings.push(format!("fold {f} skipped: training response has no variation")),
        }
    }
    if used == 0 {
        return Err(PicError::DegenerateResponse("every fold was degenerate".into()));
    }
    let mean_loss: Vec<f64> = sums.iter().map(|s| s / used as f64).collect();
    let mut best = 0;
    for (i, &v) in mean_loss.iter().enumerate() {
        if v < mean_loss[best] {
            best = i;
        }
    }
    let lambda = grid[best];
    let full = lasso_path(d.x(), y, kind, &grid[..=best]);
    let (b0, beta) = full.last().cloned().expect("nonempty grid");
    let mut fit = FitResult::new(b0, beta);
    fit.objective = held_out_loss(d.x(), y, kind, b0, &fit.beta_hat)
        * if kind == Kind::Gaussian { 0.5 } else { 1.0 }
        + lambda * fit.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
    fit.converged = true;
    fit.iterations = best + 1;
    fit.warnings = warnings;
    Ok(CvOutcome { fit, lambda, grid, mean_loss })
}

/// Lasso with the penalty level chosen by `folds`-fold cross-validation.
pub fn cv_lasso(d: &Dataset, family: &FamilySpec, folds: usize, seed: u64) -> Result<FitResult> {
    Ok(cv_lasso_detailed(d, family, &CvConfig::new(folds, seed))?.fit)
}
