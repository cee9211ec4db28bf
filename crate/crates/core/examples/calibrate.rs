//! The three ways of setting the penalty level for one Gaussian design.

use pic::calibration::{calibrate_closed_form, calibrate_gaussian_asymptotic, calibrate_mc, lambda_stat};
use pic::model::{generate_synthetic, FamilySpec, TruthSpec};

fn main() -> pic::Result<()> {
    let (n, p, alpha) = (100, 100, 0.05);
    let family = FamilySpec::gaussian();
    let d = generate_synthetic(&family, &TruthSpec::null(0.0, 1.0), n, p, 42)?;

    let mc = calibrate_mc(&family, &d, alpha, 1000, 1)?;
    let gauss = calibrate_gaussian_asymptotic(&family, &d, alpha, 10_000, 1)?;
    let closed = calibrate_closed_form(n, p, alpha)?;
    println!("monte carlo   {:.5}", mc.lambda);
    println!("gaussian      {:.5}", gauss.lambda);
    println!("closed form   {:.5}", closed.lambda);

    // the observed statistic on this null dataset; it exceeds the MC level with probability alpha
    let stat = lambda_stat(&family, &d)?;
    println!("observed Lambda {:.5} (selects nothing: {})", stat.value, stat.value <= mc.lambda);
    Ok(())
}
