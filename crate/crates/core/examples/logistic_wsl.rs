//! Logistic regression through the Bernoulli weighted score loss.

use pic::calibration::calibrate_mc;
use pic::losses::CompositeLoss;
use pic::model::{generate_synthetic, FamilySpec, PenaltySpec, TruthSpec};
use pic::solver::{fit_pic, SolverConfig};

fn main() -> pic::Result<()> {
    let family: FamilySpec = "bernoulli".parse()?;
    let truth = TruthSpec { beta0: 0.0, support: vec![0, 5, 9], values: vec![3.0; 3], sigma: 1.0 };
    let d = generate_synthetic(&family, &truth, 300, 100, 3)?;
    let cal = calibrate_mc(&family, &d, 0.05, 1000, 3)?;
    let cl = CompositeLoss::new(family);
    for penalty in [PenaltySpec::L1, PenaltySpec::scad_default()] {
        let fit = fit_pic(&cl, &penalty, cal.lambda, &d, &SolverConfig::default())?;
        println!("{penalty}: support {:?} after {} iterations", fit.support_hat, fit.iterations);
    }
    Ok(())
}
