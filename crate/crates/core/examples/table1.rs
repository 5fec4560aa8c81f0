//! A reduced rejection-rate study: a few cells of the desk-scale table, printed
//! as a grid of percentages. `hetex experiment table1` runs the full design.

use hetextremes::harness::{run_rejection_experiment, ExperimentSpec, Method};
use hetextremes::simulate::{BaseProcess, FamilyKind};

fn main() -> hetextremes::Result<()> {
    let mut spec = ExperimentSpec::table1();
    spec.models = vec![BaseProcess::independent(), BaseProcess::armax(0.25)];
    spec.families = vec![FamilyKind::C2];
    spec.k = vec![100];
    spec.r = vec![4];
    spec.replicates = 100;
    spec.methods = vec![Method::BootCvm, Method::SnCvm, Method::Edhz];
    let table = run_rejection_experiment(&spec)?;

    println!("{:<12} {:>5} {:>9} {:>9} {:>9}", "model", "beta", "boot-cvm", "sn-cvm", "edhz");
    for model in &spec.models {
        let label = model.to_string();
        for &beta in &spec.betas {
            let cell = |m: Method| {
                let block = if m == Method::Edhz { None } else { Some(4) };
                table.find(&label, FamilyKind::C2, beta, 100, block, m).map_or(f64::NAN, |r| 100.0 * r.value)
            };
            println!(
                "{label:<12} {beta:>5} {:>9.1} {:>9.1} {:>9.1}",
                cell(Method::BootCvm),
                cell(Method::SnCvm),
                cell(Method::Edhz)
            );
        }
    }
    Ok(())
}
