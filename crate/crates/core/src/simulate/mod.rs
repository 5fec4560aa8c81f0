//! Data-generating processes of the simulation study.
//!
//! Observations follow the scale model `X_i = σ(i/n) W_i` where `W` is a
//! stationary ARMAX or ARCH(1) series. The output keeps the latent series, the
//! uniformised series `U_i = F(W_i)` and the truth needed by the diagnostics.

mod arch;
mod armax;
pub mod family;
pub mod rng;
pub mod truth;

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use arch::{
    arch_reference_table, builtin_arch_table, generate_arch_quantile_table, simulate_arch,
    ArchParams, ScaleExponent, ARCH_KAPPA_PRIME_07, ARCH_THETA_07, BUILTIN_TABLE_DRAWS,
    BUILTIN_TABLE_SEED,
};
pub use armax::{simulate_armax, ARMAX_THRESHOLD};
pub use family::{FamilyKind, ScedasisFamily, THRESHOLD_LEVEL};
pub use rng::{derive_seed, rng_stream, StreamRng};
pub use truth::{EffectiveScedasis, QuantileRow, QuantileTable, ReferenceLaw, TruthModel};

use crate::error::Result;
use crate::scedasis::Series;

/// A simulated path with its latent series and truth.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub truth: TruthModel,
}

impl SimOutput {
    pub fn series(&self) -> Result<Series> {
        Series::new(self.x.clone())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with columns `index,X,W,U` (one-based index).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "X", "W", "U"])?;
        for (i, ((x, w), u)) in self.x.iter().zip(&self.w).zip(&self.u).enumerate() {
            out.write_record([
                (i + 1).to_string(),
                x.to_string(),
                w.to_string(),
                u.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The stationary base process `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseProcess {
    /// `W_t = max(λ W_{t-1}, (1-λ) V_t)` with Fréchet(1) innovations.
    Armax { lambda: f64 },
    /// `W_t = (2e-5 + λ W_{t-1}^2)^{1/2} V_t` with standard normal innovations.
    Arch(ArchParams),
}

impl BaseProcess {
    /// ARMAX with `λ = 0`: i.i.d. Fréchet(1) observations.
    pub fn independent() -> Self {
        BaseProcess::Armax { lambda: 0.0 }
    }

    pub fn armax(lambda: f64) -> Self {
        BaseProcess::Armax { lambda }
    }

    pub fn arch(lambda: f64) -> Self {
        BaseProcess::Arch(ArchParams::new(lambda))
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            BaseProcess::Armax { lambda } => Some(1.0 - lambda),
            BaseProcess::Arch(p) => p.theta(),
        }
    }

    pub fn simulate<R: Rng>(&self, n: usize, family: &ScedasisFamily, rng: &mut R) -> Result<SimOutput> {
        match self {
            BaseProcess::Armax { lambda } => armax::armax_with(rng, n, *lambda, family),
            BaseProcess::Arch(p) => arch::arch_with(rng, n, p, family),
        }
    }

    pub fn simulate_seeded(&self, n: usize, family: &ScedasisFamily, seed: u64) -> Result<SimOutput> {
        self.simulate(n, family, &mut rng_stream(seed, 0))
    }
}

impl fmt::Display for BaseProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            BaseProcess::Armax { lambda } if *lambda == 0.0 => "indep".to_string(),
            BaseProcess::Armax { lambda } => format!("armax({lambda})"),
            BaseProcess::Arch(p) if p.exponent == ScaleExponent::TailMatched => {
                format!("arch({},tail-matched)", p.lambda)
            }
            BaseProcess::Arch(p) => format!("arch({})", p.lambda),
        };
        f.pad(&label)
    }
}

/// Empirical Kolmogorov–Smirnov distance between a sample and the uniform law.
pub fn ks_distance_uniform(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (u - lo).abs().max((hi - u).abs())
        })
        .fold(0.0, f64::max)
}
