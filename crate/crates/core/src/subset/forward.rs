use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{PicError, Result};
use crate::model::{Dataset, FamilySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Residual sums of squares of least-squares refits.
    Rss,
    /// Binomial deviances of logistic refits.
    Deviance,
}

/// Greedy forward-selection path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardPath {
    pub order: Vec<usize>,
    /// Fit measure after 0, 1, ..., k steps.
    pub rss: Vec<f64>,
    pub k: usize,
    pub kind: PathKind,
}

/// Relative squared norm below which a column counts as already spanned.
const COLLINEAR: f64 = 1e-10;

/// Forward selection up to `k` steps. Gaussian-type families use residual
/// sums of squares, binary families the logistic deviance.
pub fn forward_path(d: &Dataset, family: &FamilySpec, k: usize) -> Result<ForwardPath> {
    forward_path_with(d, family, k, None)
}

/// As [`forward_path`]. With `stop_gamma = Some(g)` a deviance path ends
/// early once `s * ln(n)` exceeds the best EBIC(g) score seen so far: no
/// longer prefix can then win under BIC or EBIC(g), so selections agree
/// with the full path.
pub fn forward_path_with(
    d: &Dataset,
    family: &FamilySpec,
    k: usize,
    stop_gamma: Option<f64>,
) -> Result<ForwardPath> {
    let limit = d.p().min(d.n().saturating_sub(2));
    if k > limit {
        return Err(PicError::InvalidArgument(format!(
            "path length {k} exceeds min(p, n - 2) = {limit}"
        )));
    }
    if family.is_gaussian_like() {
        Ok(rss_path(d.x(), d.y().as_slice(), k))
    } else if family.is_binary() {
        crate::losses::CompositeLoss::new(*family).validate_response(d.y().as_slice())?;
        deviance_path(d.x(), d.y().as_slice(), k, stop_gamma)
    } else {
        Err(PicError::InvalidArgument(format!(
            "forward selection supports Gaussian and binary families, not {family}"
        )))
    }
}

/// Gram-Schmidt forward selection on centered columns.
pub(crate) fn rss_path(x: &DMatrix<f64>, y: &[f64], k: usize) -> ForwardPath {
    let (n, p) = x.shape();
    let mut z = x.clone();
    let mut orig_sq = vec![0.0; p];
    for j in 0..p {
        let mut col = z.column_mut(j);
        let m = col.mean();
        col.add_scalar_mut(-m);
        orig_sq[j] = col.norm_squared();
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let mut r = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let mut rss = vec![r.norm_squared()];
    let mut order = Vec::new();
    let mut used = vec![false; p];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..p {
            if used[j] {
                continue;
            }
            let zz = z.column(j).norm_squared();
            if zz <= COLLINEAR * orig_sq[j] || zz == 0.0 {
                continue;
            }
            let red = z.column(j).dot(&r).powi(2) / zz;
            if best.is_none_or(|(_, b)| red > b) {
                best = Some((j, red));
            }
        }
        let Some((j, _)) = best else { break };
        used[j] = true;
        order.push(j);
        let q = z.column(j).normalize();
        let proj = q.dot(&r);
        r.axpy(-proj, &q, 1.0);
        for l in 0..p {
            if !used[l] {
                let c = q.dot(&z.column(l));
                z.column_mut(l).axpy(-c, &q, 1.0);
            }
        }
        let next = r.norm_squared();
        // rounding must not make the sequence increase
        rss.push(next.min(*rss.last().unwrap()));
    }
    let k = order.len();
    ForwardPath { order, rss, k, kind: PathKind::Rss }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn deviance_of(eta: &DVector<f64>, y: &[f64]) -> f64 {
    let mut dev = 0.0;
    for (e, yi) in eta.iter().zip(y) {
        // -log sigmoid(+-e), computed stably
        let t = if *yi == 1.0 { *e } else { -*e };
        dev += if t > 0.0 { (-t).exp().ln_1p() } else { -t + t.exp().ln_1p() };
    }
    2.0 * dev
}

/// Unpenalized logistic regression on `[1, a]` by damped Newton steps.
/// Returns the coefficients (intercept first) and the deviance.
pub(crate) fn logistic_fit(
    a: &DMatrix<f64>,
    y: &[f64],
    start: &DVector<f64>,
) -> (DVector<f64>, f64) {
    let (n, k) = a.shape();
    let mut design = DMatrix::from_element(n, k + 1, 1.0);
    design.view_mut((0, 1), (n, k)).copy_from(a);
    let mut coef = start.clone();
    let mut eta = &design * &coef;
    let mut dev = deviance_of(&eta, y);
    for _ in 0..50 {
        let mut grad = DVector::zeros(k + 1);
        let mut wd = design.clone();
        for i in 0..n {
            let mu = sigmoid(eta[i]);
            let w = (mu * (1.0 - mu)).max(1e-12);
            grad.axpy(y[i] - mu, &design.row(i).transpose(), 1.0);
            wd.row_mut(i).scale_mut(w);
        }
        let mut h = design.tr_mul(&wd);
        for j in 0..=k {
            h[(j, j)] += 1e-10;
        }
        let Some(step) = h.cholesky().map(|c| c.solve(&grad)) else { break };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = &coef + &step * t;
            let eta_c = &design * &cand;
            let dev_c = deviance_of(&eta_c, y);
            if dev_c <= dev {
                let change = dev - dev_c;
                coef = cand;
                eta = eta_c;
                dev = dev_c;
                improved = change > 1e-10 * (dev + 0.1);
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (coef, dev)
}

fn deviance_path(
    x: &DMatrix<f64>,
    y: &[f64],
    k: usize,
    stop_gamma: Option<f64>,
) -> Result<ForwardPath> {
    let (n, p) = x.shape();
    let ybar = y.iter().sum::<f64>() / n as f64;
    if !(ybar > 0.0 && ybar < 1.0) {
        return Err(PicError::DegenerateResponse(
            "binary response has no variation (mean is 0 or 1)".into(),
        ));
    }
    let null_eta = DVector::from_element(n, (ybar / (1.0 - ybar)).ln());
    let mut devs = vec![deviance_of(&null_eta, y)];
    let mut coef = DVector::from_element(1, null_eta[0]);
    let mut order: Vec<usize> = Vec::new();
    let ln_n = (n as f64).ln();
    let mut bound = devs[0];
    for step in 0..k {
        if let Some(g) = stop_gamma {
            let s = step;
            bound = bound.min(devs[s] + s as f64 * ln_n + 2.0 * g.max(0.0) * super::ln_binomial(p, s));
            if (s + 1) as f64 * ln_n > bound {
                break;
            }
        }
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for j in 0..p {
            if order.contains(&j) {
                continue;
            }
            let mut cols = order.clone();
            cols.push(j);
            let a = x.select_columns(&cols);
            let mut start = coef.clone().insert_row(coef.len(), 0.0);
            start[0] = coef[0];
            let (c, dev) = logistic_fit(&a, y, &start);
            if best.as_ref().is_none_or(|(_, b, _)| dev < *b) {
                best = Some((j, dev, c));
            }
        }
        let Some((j, dev, c)) = best else { break };
        order.push(j);
        coef = c;
        devs.push(dev.min(*devs.last().unwrap()));
    }
    let k = order.len();
    Ok(ForwardPath { order, rss: devs, k, kind: PathKind::Deviance })
}
