//! Weighted L1-penalized least absolute deviations as a linear program.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{PicError, Result};

/// Minimizes `mean|y - b0 - X beta| + lambda * sum_j w_j |beta_j|` exactly.
pub(crate) fn fit_lad(
    x: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    lambda: f64,
) -> Result<(f64, DVector<f64>)> {
    let (n, p) = x.shape();
    let nf = n as f64;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let pos = (0.0, f64::INFINITY);
    let b0 = lp.add_var(0.0, free);
    let bp: Vec<_> = (0..p).map(|j| lp.add_var(lambda * weights[j], pos)).collect();
    let bm: Vec<_> = (0..p).map(|j| lp.add_var(lambda * weights[j], pos)).collect();
    let ep: Vec<_> = (0..n).map(|_| lp.add_var(1.0 / nf, pos)).collect();
    let em: Vec<_> = (0..n).map(|_| lp.add_var(1.0 / nf, pos)).collect();
    for i in 0..n {
        // b0 + x_i (beta+ - beta-) + e+ - e- = y_i
        let mut row = Vec::with_capacity(2 * p + 3);
        row.push((b0, 1.0));
        for j in 0..p {
            let v = x[(i, j)];
            if v != 0.0 {
                row.push((bp[j], v));
                row.push((bm[j], -v));
            }
        }
        row.push((ep[i], 1.0));
        row.push((em[i], -1.0));
        lp.add_constraint(&row, ComparisonOp::Eq, y[i]);
    }
    let sol = lp
        .solve()
        .map_err(|e| PicError::InvalidArgument(format!("LAD linear program failed: {e}")))?
        .into_solution()
        .map_err(|_| PicError::InvalidArgument("LAD linear program was interrupted".into()))?;
    let beta = DVector::from_fn(p, |j, _| {
        let v = sol.var_value(bp[j]) - sol.var_value(bm[j]);
        if v.abs() < 1e-12 { 0.0 } else { v }
    });
    Ok((sol.var_value(b0), beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpenalized_line_through_median() {
        let x = DMatrix::from_column_slice(5, 1, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let y = [-4.0, -2.0, 0.0, 2.0, 40.0];
        let (b0, b) = fit_lad(&x, &y, &[1.0], 0.0).unwrap();
        assert!(b0.abs() < 1e-9 && (b[0] - 2.0).abs() < 1e-9, "{b0} {b}");
    }

    #[test]
    fn large_penalty_gives_median() {
        let x = DMatrix::from_column_slice(3, 1, &[-1.0, 0.0, 1.0]);
        let (b0, b) = fit_lad(&x, &[1.0, 5.0, 9.0], &[1.0], 100.0).unwrap();
        assert_eq!(b[0], 0.0);
        assert!((b0 - 5.0).abs() < 1e-9);
    }
}
