//! Regenerates the shipped stationary-law table of the ARCH(1) model with λ = 0.7.
//!
//! ```bash
//! cargo run --release --example arch_quantile_table > crates/core/data/arch_lambda07_quantiles.csv
//! ```

use hetextremes::simulate::{generate_arch_quantile_table, BUILTIN_TABLE_DRAWS, BUILTIN_TABLE_SEED};

fn main() -> hetextremes::Result<()> {
    let table = generate_arch_quantile_table(0.7, BUILTIN_TABLE_DRAWS, BUILTIN_TABLE_SEED)?;
    table.write_csv(std::io::stdout().lock())
}
