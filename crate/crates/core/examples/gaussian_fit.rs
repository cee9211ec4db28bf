//! Sparse Gaussian regression with the square-root loss, L1 and SCAD penalties.

use pic::calibration::calibrate_mc;
use pic::losses::CompositeLoss;
use pic::model::{generate_synthetic, FamilySpec, PenaltySpec, TruthSpec};
use pic::solver::{fit_and_refit, SolverConfig};

fn main() -> pic::Result<()> {
    let family = FamilySpec::gaussian();
    let truth = TruthSpec { beta0: 1.0, support: vec![3, 17, 40], values: vec![3.0, -2.0, 1.5], sigma: 2.0 };
    let d = generate_synthetic(&family, &truth, 200, 100, 7)?;
    let lambda = calibrate_mc(&family, &d, 0.05, 1000, 7)?.lambda;
    let cl = CompositeLoss::new(family);
    println!("lambda = {lambda:.4}, true support {:?}", truth.support);
    for penalty in [PenaltySpec::L1, PenaltySpec::scad_default()] {
        let fit = fit_and_refit(&cl, &penalty, lambda, &d, &SolverConfig::default())?;
        let refit = fit.refit_beta.as_ref().unwrap();
        let coefs: Vec<String> = fit.support_hat.iter().map(|&j| format!("{j}:{:.3}", refit[j])).collect();
        println!("{penalty:>8}: support {:?}, refit {}", fit.support_hat, coefs.join(" "));
    }
    Ok(())
}
