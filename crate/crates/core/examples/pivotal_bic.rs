//! Discrete selection: forward selection scored by the pivotal criterion,
//! compared with BIC and EBIC on the same path.

use pic::model::{generate_synthetic, FamilySpec, TruthSpec};
use pic::subset::{forward_path, pic_l0_lambda, select_ic, Criterion, L0Mode};

fn main() -> pic::Result<()> {
    let family = FamilySpec::gaussian();
    let truth = TruthSpec { beta0: 0.0, support: vec![2, 11, 30, 31], values: vec![3.0; 4], sigma: 1.0 };
    let d = generate_synthetic(&family, &truth, 200, 100, 5)?;
    let lambda = pic_l0_lambda(&d, L0Mode::Forward, 0.05, 1000, 5)?.lambda;
    let path = forward_path(&d, &family, 30)?;
    println!("true support {:?}", truth.support);
    for c in [Criterion::PivotalBic { lambda }, Criterion::Bic, Criterion::Ebic { gamma: 0.5 }] {
        let score = select_ic(&path, c, d.n(), d.p())?;
        println!("{c:?}: {:?}", score.support(&path));
    }
    Ok(())
}
