//! Both extremal-index estimators on heteroscedastic ARMAX and ARCH paths,
//! averaged over a few seeds.

use hetextremes::extremal_index::{theta_estimators, EiConfig};
use hetextremes::kernels::BoundaryKernel;
use hetextremes::simulate::{BaseProcess, FamilyKind, ScedasisFamily};

fn main() -> hetextremes::Result<()> {
    let family = ScedasisFamily::new(FamilyKind::C2, 0.5)?;
    let cfg = EiConfig::new(32, 400, 0.2, 0.1);
    let kernel = BoundaryKernel::biweight(cfg.h)?;
    for model in [BaseProcess::armax(0.25), BaseProcess::arch(0.7)] {
        let reps = 20;
        let (mut t1, mut t2) = (0.0, 0.0);
        for seed in 0..reps {
            let est = theta_estimators(&model.simulate_seeded(2000, &family, seed)?.series()?, &cfg, &kernel)?;
            t1 += est.theta / reps as f64;
            t2 += est.theta2 / reps as f64;
        }
        println!("{model:<12} theta = {:.3}   mean theta_1 = {t1:.3}   mean theta_2 = {t2:.3}", model.theta().unwrap());
    }

    let one = theta_estimators(&BaseProcess::armax(0.25).simulate_seeded(2000, &family, 99)?.series()?, &cfg, &kernel)?;
    println!(
        "\nsingle run: {} blocks, T = {:.3}, tau = {:.3}, theta_1 = {:.3}, theta_2 = {:.3} (clamped: {}, {})",
        one.z.len(),
        one.t_hat,
        one.tau_hat,
        one.theta,
        one.theta2,
        one.theta_clamped,
        one.theta2_clamped
    );
    Ok(())
}
