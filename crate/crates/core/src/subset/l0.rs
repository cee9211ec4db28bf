use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::calibration::{mc_draws, upper_quantile, validate_alpha, CalibrationMethod, CalibrationResult, MIN_DRAWS};
use crate::error::{PicError, Result};
use crate::model::{Dataset, FamilySpec};
use crate::rng;

/// Largest `p` for which the exhaustive statistic is offered.
pub const BEST_SUBSET_MAX_P: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum L0Mode {
    /// `log(RSS_0 / RSS_1)` for the best single predictor.
    Forward,
    /// `max_s log(RSS_0 / RSS_s) / s` over exhaustive best subsets.
    BestSubset,
}

/// Precomputed pieces of the design shared by every response.
pub(crate) struct L0Stat {
    z: DMatrix<f64>,
    col_sq: Vec<f64>,
    mode: L0Mode,
    smax: usize,
    /// Best-subset masks with their column lists and inverse Gram matrices.
    subsets: Vec<(Vec<usize>, DMatrix<f64>)>,
}

impl L0Stat {
    pub(crate) fn new(x: &DMatrix<f64>, mode: L0Mode) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 3 {
            return Err(PicError::InvalidArgument("need at least 3 observations".into()));
        }
        if mode == L0Mode::BestSubset && p > BEST_SUBSET_MAX_P {
            return Err(PicError::InvalidArgument(format!(
                "best-subset statistic is limited to p <= {BEST_SUBSET_MAX_P}, got {p}"
            )));
        }
        let mut z = x.clone();
        for j in 0..p {
            let m = z.column(j).mean();
            z.column_mut(j).add_scalar_mut(-m);
        }
        let col_sq: Vec<f64> = (0..p).map(|j| z.column(j).norm_squared()).collect();
        let smax = p.min(n - 2);
        let mut subsets = Vec::new();
        if mode == L0Mode::BestSubset {
            let gram = z.tr_mul(&z);
            for mask in 1u32..(1u32 << p) {
                let cols: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
                if cols.len() > smax {
                    continue;
                }
                let g = gram.select_rows(&cols).select_columns(&cols);
                if let Some(ch) = g.cholesky() {
                    subsets.push((cols, ch.inverse()));
                }
            }
        }
        Ok(L0Stat { z, col_sq, mode, smax, subsets })
    }

    pub(crate) fn stat(&self, y: &[f64]) -> Result<f64> {
        let n = y.len() as f64;
        let ybar = y.iter().sum::<f64>() / n;
        let r = DVector::from_iterator(y.len(), y.iter().map(|v| v - ybar));
        let rss0 = r.norm_squared();
        if rss0 == 0.0 {
            return Err(PicError::DegenerateResponse("constant response".into()));
        }
        let c = self.z.tr_mul(&r);
        let interp = |rss: f64| {
            if rss <= 1e-12 * rss0 {
                Err(PicError::DegenerateResponse("a subset interpolates the response".into()))
            } else {
                Ok(())
            }
        };
        match self.mode {
            L0Mode::Forward => {
                let best = (0..c.len())
                    .filter(|&j| self.col_sq[j] > 0.0)
                    .map(|j| c[j] * c[j] / self.col_sq[j])
                    .fold(0.0f64, f64::max);
                let rss1 = (rss0 - best).max(0.0);
                interp(rss1)?;
                Ok((rss0 / rss1).ln())
            }
            L0Mode::BestSubset => {
                let mut best = vec![0.0f64; self.smax + 1];
                for (cols, inv) in &self.subsets {
                    let cs = DVector::from_iterator(cols.len(), cols.iter().map(|&j| c[j]));
                    let q = cs.dot(&(inv * &cs));
                    let s = cols.len();
                    if q > best[s] {
                        best[s] = q;
                    }
                }
                let mut out = 0.0f64;
                for (s, &q) in best.iter().enumerate().skip(1) {
                    let rss = (rss0 - q).max(0.0);
                    interp(rss)?;
                    out = out.max((rss0 / rss).ln() / s as f64);
                }
                Ok(out)
            }
        }
    }
}

/// The l0 zero-thresholding statistic of `d`.
pub fn l0_statistic(d: &Dataset, mode: L0Mode) -> Result<f64> {
    L0Stat::new(d.x(), mode)?.stat(d.y().as_slice())
}

/// Monte Carlo quantile of the l0 statistic under Gaussian null responses.
pub fn pic_l0_lambda(
    d: &Dataset,
    mode: L0Mode,
    alpha: f64,
    m: usize,
    seed: u64,
) -> Result<CalibrationResult> {
    validate_alpha(alpha)?;
    if m < MIN_DRAWS {
        return Err(PicError::InvalidArgument(format!("need at least {MIN_DRAWS} draws, got {m}")));
    }
    let st = L0Stat::new(d.x(), mode)?;
    let n = d.n();
    let mut draws = mc_draws(m, seed, rng::TAG_L0_CALIBRATION, |r| {
        let y: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        st.stat(&y)
    })?;
    let method = match mode {
        L0Mode::Forward => CalibrationMethod::L0Forward { m, seed },
        L0Mode::BestSubset => CalibrationMethod::L0BestSubset { m, seed },
    };
    Ok(CalibrationResult {
        lambda: upper_quantile(&mut draws, alpha),
        alpha,
        method,
        family: FamilySpec::gaussian(),
    })
}
