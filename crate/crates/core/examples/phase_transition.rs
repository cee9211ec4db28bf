//! A small exact-support-recovery sweep; pass a CSV path to save the curves.

use pic::experiments::{run_phase_with, write_phase_csv, CalibrationMode, Method, PhaseGrid};
use pic::model::FamilySpec;

fn main() -> pic::Result<()> {
    let mut grid = PhaseGrid::new(
        FamilySpec::gaussian(),
        vec![200],
        100,
        (0..=40).step_by(5).collect(),
        20,
        vec![Method::PicL1, Method::PicScad, Method::PicL0, Method::Bic],
        2024,
    );
    grid.calibration = CalibrationMode::GaussianAsymptotic { m: 2000 };
    let curves = run_phase_with(&grid, |cells| {
        let line: Vec<String> = cells.iter().map(|c| format!("{}={:.2}", c.method, c.pesr)).collect();
        println!("s={:>2}  {}", cells[0].s, line.join("  "));
    })?;
    if let Some(path) = std::env::args().nth(1) {
        write_phase_csv(&curves, std::fs::File::create(path)?)?;
    }
    Ok(())
}
