//! MSE (x 1000) of both extremal-index estimators against the block size for the
//! ARCH model, as CSV on stdout.

use hetextremes::harness::{run_ei_experiment, ExperimentSpec, Method};
use hetextremes::simulate::FamilyKind;

fn main() -> hetextremes::Result<()> {
    let mut spec = ExperimentSpec::mse();
    spec.betas = vec![0.5];
    spec.replicates = 100;
    let table = run_ei_experiment(&spec)?;
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(["k", "q", "theta_1", "theta_2"])?;
    for &k in &spec.k {
        for &q in &spec.q {
            let mse = |m: Method| {
                table
                    .find("arch(0.7)", FamilyKind::C2, 0.5, k, Some(q), m)
                    .map_or(f64::NAN, |r| 1000.0 * r.value)
            };
            out.write_record([k.to_string(), q.to_string(), format!("{:.2}", mse(Method::Theta)), format!("{:.2}", mse(Method::Theta2))])?;
        }
    }
    out.flush()?;
    Ok(())
}
