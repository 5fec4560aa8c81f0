//! Simulates the Brownian-bridge critical values of the self-normalised statistics
//! and prints them as CSV.
//!
//! The shipped table `data/selfnorm_quantiles.csv` is the output of
//!
//! ```text
//! cargo run --release --example selfnorm_quantiles > crates/core/data/selfnorm_quantiles.csv
//! ```
//!
//! Pass `paths grid seed` to override the defaults.

use hetextremes::testing::{
    selfnorm_reference_quantiles, DEFAULT_ALPHAS, DEFAULT_GRID, DEFAULT_PATHS, DEFAULT_SEED,
};

fn main() -> hetextremes::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are integers"))
        .collect();
    let paths = args.first().map_or(DEFAULT_PATHS, |&v| v as usize);
    let grid = args.get(1).map_or(DEFAULT_GRID, |&v| v as usize);
    let seed = args.get(2).copied().unwrap_or(DEFAULT_SEED);
    let table = selfnorm_reference_quantiles(&DEFAULT_ALPHAS, paths, grid, seed)?;
    table.write_csv(std::io::stdout().lock())
}
