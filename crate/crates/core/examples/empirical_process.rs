//! The sequential tail empirical process and its simple counterpart built from
//! the latent uniforms; their distance shrinks as n grows.

use hetextremes::empirical_process::{default_grids, simple_step, step};
use hetextremes::simulate::{BaseProcess, FamilyKind, ScedasisFamily};

fn main() -> hetextremes::Result<()> {
    let family = ScedasisFamily::new(FamilyKind::C1, 0.5)?;
    let (gs, gx) = default_grids();
    for n in [1000, 4000, 16_000, 64_000] {
        let k = (3.0 * (n as f64).sqrt()) as usize;
        let sim = BaseProcess::independent().simulate_seeded(n, &family, 3)?;
        let f = step(&sim.series()?, &sim.truth, k, &gs, &gx)?;
        let s = simple_step(&sim.u, &sim.truth, k, &gs, &gx)?;
        println!(
            "n = {n:>6}, k = {k:>4}: sup|F_n| = {:.3}, sup|S_n| = {:.3}, sup|F_n - S_n| = {:.4}",
            f.sup_abs(),
            s.sup_abs(),
            f.difference(&s)?.sup_abs()
        );
    }
    Ok(())
}
