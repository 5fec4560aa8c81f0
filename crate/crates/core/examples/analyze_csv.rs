//! End-to-end analysis of a CSV file: writes a simulated series, then runs the
//! scedasis curve, all tests and the extremal-index estimators on it.

use hetextremes::harness::{analyze_csv, AnalyzeConfig, Column};
use hetextremes::simulate::{BaseProcess, FamilyKind, ScedasisFamily};

fn main() -> hetextremes::Result<()> {
    let dir = std::env::temp_dir().join("hetex_analyze_example");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("series.csv");
    let family = ScedasisFamily::new(FamilyKind::C1, 0.5)?;
    BaseProcess::armax(0.25)
        .simulate_seeded(3000, &family, 17)?
        .write_csv(std::fs::File::create(&input)?)?;

    let report = analyze_csv(&input, &Column::Name("X".into()), &AnalyzeConfig::default(), Some(&dir))?;
    println!("{} observations from column '{}', threshold {:.3}", report.n, report.header.as_deref().unwrap_or("?"), report.threshold);
    for t in &report.tests {
        println!("  {:<13} reject = {}", t.statistic.to_string(), t.reject);
    }
    if let Some(ei) = &report.extremal_index {
        println!("  theta_1 = {:.3}, theta_2 = {:.3}", ei.theta, ei.theta2);
    }
    for w in &report.warnings {
        println!("  warning: {w}");
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
