//! Discrete-complexity selectors: forward-selection paths scored by
//! information criteria, the pivotal l0 penalty level, and a cross-validated
//! lasso baseline.

mod cv;
mod forward;
mod l0;

pub use cv::{cv_lasso, CvConfig, DEFAULT_FOLDS};
pub use forward::{forward_path, forward_path_with, ForwardPath, PathKind};
pub use l0::{l0_statistic, pic_l0_lambda, L0Mode, BEST_SUBSET_MAX_P};

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{PicError, Result};
use crate::losses::CompositeLoss;
use crate::model::{Dataset, FamilySpec, FitResult};
use crate::solver::refit_support;

pub const DEFAULT_EBIC_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Criterion {
    PivotalBic { lambda: f64 },
    Bic,
    Ebic { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcScore {
    pub criterion: Criterion,
    pub s_hat: usize,
    pub score_by_s: Vec<f64>,
}

impl IcScore {
    /// Predictors entered in the first `s_hat` steps, sorted.
    pub fn support(&self, path: &ForwardPath) -> Vec<usize> {
        let mut s = path.order[..self.s_hat].to_vec();
        s.sort_unstable();
        s
    }
}

/// `ln C(p, s)`.
pub fn ln_binomial(p: usize, s: usize) -> f64 {
    if s > p {
        return f64::NEG_INFINITY;
    }
    ln_gamma(p as f64 + 1.0) - ln_gamma(s as f64 + 1.0) - ln_gamma((p - s) as f64 + 1.0)
}

/// Scores every prefix of `path`. BIC and EBIC pick the minimizing size
/// (ties go to the smaller model). The pivotal criterion stops at the first
/// local minimum along the path: forward selection halts once the next step
/// no longer lowers the score, so the empty model is chosen exactly when
/// `log(RSS_0 / RSS_1) <= lambda`, the event its penalty level is calibrated on.
pub fn select_ic(path: &ForwardPath, criterion: Criterion, n: usize, p: usize) -> Result<IcScore> {
    if path.rss.is_empty() {
        return Err(PicError::InvalidArgument("empty path".into()));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let scores: Vec<f64> = path
        .rss
        .iter()
        .enumerate()
        .map(|(s, &v)| {
            let sf = s as f64;
            let fit = match path.kind {
                PathKind::Rss => match criterion {
                    Criterion::PivotalBic { .. } => (v / nf).ln(),
                    _ => nf * (v / nf).ln(),
                },
                PathKind::Deviance => v,
            };
            match criterion {
                Criterion::PivotalBic { lambda } => fit + lambda * sf,
                Criterion::Bic => fit + sf * ln_n,
                Criterion::Ebic { gamma } => fit + sf * ln_n + 2.0 * gamma * ln_binomial(p, s),
            }
        })
        .collect();
    if matches!(criterion, Criterion::PivotalBic { .. }) && path.kind == PathKind::Deviance {
        return Err(PicError::InvalidArgument(
            "the pivotal l0 criterion is defined for Gaussian residual sums of squares".into(),
        ));
    }
    let mut s_hat = 0;
    if matches!(criterion, Criterion::PivotalBic { .. }) {
        while s_hat + 1 < scores.len() && scores[s_hat + 1] < scores[s_hat] {
            s_hat += 1;
        }
    } else {
        for (s, &v) in scores.iter().enumerate() {
            if v < scores[s_hat] {
                s_hat = s;
            }
        }
    }
    Ok(IcScore { criterion, s_hat, score_by_s: scores })
}

/// Forward path, criterion and refit on the chosen prefix.
pub fn select_and_refit(
    d: &Dataset,
    family: &FamilySpec,
    criterion: Criterion,
    k: usize,
) -> Result<(IcScore, FitResult)> {
    let path = forward_path(d, family, k)?;
    let score = select_ic(&path, criterion, d.n(), d.p())?;
    let fit = refit_support(&CompositeLoss::new(*family), d, &score.support(&path))?;
    Ok((score, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rss_path(rss: Vec<f64>) -> ForwardPath {
        let k = rss.len() - 1;
        ForwardPath { order: (0..k).collect(), rss, k, kind: PathKind::Rss }
    }

    #[test]
    fn flat_rss_selects_empty_model() {
        let path = rss_path(vec![4.0; 5]);
        for c in [Criterion::PivotalBic { lambda: 0.01 }, Criterion::Bic, Criterion::Ebic { gamma: 0.5 }] {
            assert_eq!(select_ic(&path, c, 10, 20).unwrap().s_hat, 0);
        }
    }

    #[test]
    fn ebic_zero_gamma_is_bic() {
        let path = rss_path(vec![10.0, 5.0, 4.0, 3.9]);
        let b = select_ic(&path, Criterion::Bic, 20, 30).unwrap();
        let e = select_ic(&path, Criterion::Ebic { gamma: 0.0 }, 20, 30).unwrap();
        assert_eq!(b.score_by_s, e.score_by_s);
    }

    #[test]
    fn pivotal_criterion_stops_at_first_local_minimum() {
        // log-RSS drops by 1.0, then 0.1, then 2.0
        let e = std::f64::consts::E;
        let path = rss_path(vec![e.powi(3), e.powi(2), e.powf(1.9), e.powf(-0.1)]);
        let sc = select_ic(&path, Criterion::PivotalBic { lambda: 0.5 }, 10, 20).unwrap();
        assert_eq!(sc.s_hat, 1);
        let sc = select_ic(&path, Criterion::PivotalBic { lambda: 1.5 }, 10, 20).unwrap();
        assert_eq!(sc.s_hat, 0);
    }

    #[test]
    fn binomial_log() {
        assert!((ln_binomial(5, 2) - 10f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(7, 0), 0.0);
        assert!(ln_binomial(1000, 500).is_finite());
    }
}
