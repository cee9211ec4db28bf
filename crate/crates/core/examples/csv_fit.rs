//! Fit a CSV file: `cargo run --example csv_fit -- data.csv y`. Without
//! arguments a small synthetic file is written and used.

use std::io::Write;

use pic::calibration::calibrate_mc;
use pic::losses::CompositeLoss;
use pic::model::{read_csv, FamilySpec, PenaltySpec};
use pic::solver::{fit_and_refit, SolverConfig};

fn main() -> pic::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let (path, response) = if args.len() >= 3 {
        (args[1].clone(), args[2].clone())
    } else {
        let path = std::env::temp_dir().join("pic_csv_fit.csv");
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "age,dose,noise,outcome")?;
        for i in 0..60 {
            let (age, dose, noise) = (20.0 + i as f64, (i % 7) as f64, ((i * 37) % 11) as f64);
            let outcome = 2.0 + 0.8 * dose + 0.3 * (((i * 13) % 5) as f64 - 2.0);
            writeln!(f, "{age},{dose},{noise},{outcome}")?;
        }
        (path.to_string_lossy().into_owned(), "outcome".to_string())
    };
    let d = read_csv(&path, &response)?;
    let family = FamilySpec::gaussian();
    let lambda = calibrate_mc(&family, &d, 0.05, 1000, 0)?.lambda;
    let fit = fit_and_refit(&CompositeLoss::new(family), &PenaltySpec::L1, lambda, &d, &SolverConfig::default())?;
    let names = d.names().unwrap();
    let (b0, b) = d.to_original_scale(fit.refit_beta0.unwrap(), fit.refit_beta.as_ref().unwrap());
    println!("intercept {b0:.4}");
    for &j in &fit.support_hat {
        println!("{:<8} {:.4}", names[j], b[j]);
    }
    Ok(())
}
