//! How often pure noise yields the empty model at the calibrated level.

use pic::experiments::{run_null_coverage_with, NullCoverageConfig, NullSelector};
use pic::model::FamilySpec;

fn main() -> pic::Result<()> {
    for (name, family) in [("gaussian", FamilySpec::gaussian()), ("laplace", "laplace".parse()?)] {
        let cfg = NullCoverageConfig::new(family, 100, 50, 0.05, 200, 9);
        let r = run_null_coverage_with(&cfg)?;
        println!("{name:<9} l1: {:.3} +- {:.3}", r.fraction, r.se);
    }
    let mut cfg = NullCoverageConfig::new(FamilySpec::gaussian(), 100, 50, 0.05, 200, 9);
    cfg.selector = NullSelector::PicL0Forward;
    let r = run_null_coverage_with(&cfg)?;
    println!("gaussian  l0: {:.3} +- {:.3}", r.fraction, r.se);
    Ok(())
}
