//! The boundary-corrected biweight kernel: mass and first moment stay at 1 and 0
//! right up to the edge of `[0, 1]`, while the plain kernel loses both.

use hetextremes::kernels::{kernel_moment_a, BoundaryKernel, Kernel};

fn main() -> hetextremes::Result<()> {
    let h = 0.2;
    let bk = BoundaryKernel::biweight(h)?;
    let plain = Kernel::biweight();
    println!("{:>5} {:>10} {:>10} {:>12} {:>12}", "p", "a0(p)", "a1(p)", "corr. mass", "corr. mean");
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let c = bk.correction(p * h)?;
        let cells = 100_000;
        let step = (p + 1.0) / cells as f64;
        let (mut m0, mut m1) = (0.0, 0.0);
        for j in 0..cells {
            let x = -1.0 + (j as f64 + 0.5) * step;
            let k = bk.evaluate_with(c, x);
            m0 += k * step;
            m1 += x * k * step;
        }
        println!(
            "{p:>5.1} {:>10.6} {:>10.6} {m0:>12.8} {m1:>12.1e}",
            kernel_moment_a(&plain, 0, p)?,
            kernel_moment_a(&plain, 1, p)?,
        );
    }
    println!("\nK_b(x, 0) against K(x):");
    for x in [-1.0, -0.5, 0.0] {
        println!("  x = {x:>4}: {:>8.4} vs {:>6.4}", bk.evaluate(x, 0.0)?, plain.evaluate(x));
    }
    Ok(())
}
