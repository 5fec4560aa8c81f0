use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::family::{ScedasisFamily, THRESHOLD_LEVEL};
use crate::simulate::rng::rng_stream;
use crate::simulate::truth::{default_levels, EffectiveScedasis, QuantileTable, ReferenceLaw, TruthModel};
use crate::simulate::SimOutput;

/// Tail constant of the ARCH(1) model with `λ = 0.7`: `P(W^2 > x)` decays like `x^{-1.586}`.
pub const ARCH_KAPPA_PRIME_07: f64 = 1.586;

/// Extremal index of the ARCH(1) model with `λ = 0.7`.
pub const ARCH_THETA_07: f64 = 0.721;

const ARCH_INTERCEPT: f64 = 2e-5;

const BUILTIN_TABLE_CSV: &str = include_str!("../../data/arch_lambda07_quantiles.csv");

/// Draws used for the shipped reference table and the seed that produced them.
pub const BUILTIN_TABLE_DRAWS: usize = 10_000_000;
pub const BUILTIN_TABLE_SEED: u64 = 20_070_701;

/// Exponent applied to `c(i/n)` before scaling `W_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleExponent {
    /// `c^{1/κ'}`: the classical construction of the scale model. Since
    /// `|W|` has tail index `2κ'`, the realised scedasis is `c^2 / ∫ c^2`.
    #[default]
    Kappa,
    /// `c^{1/(2κ')}`: realised scedasis equals `c`.
    TailMatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchParams {
    pub lambda: f64,
    /// Tail constant `κ'`; filled in automatically only for `λ = 0.7`.
    #[serde(default)]
    pub kappa_prime: Option<f64>,
    #[serde(default)]
    pub exponent: ScaleExponent,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    10_000
}

impl ArchParams {
    pub fn new(lambda: f64) -> Self {
        ArchParams {
            lambda,
            kappa_prime: None,
            exponent: ScaleExponent::Kappa,
            burn_in: default_burn_in(),
        }
    }

    pub fn with_exponent(mut self, exponent: ScaleExponent) -> Self {
        self.exponent = exponent;
        self
    }

    fn is_default_lambda(&self) -> bool {
        (self.lambda - 0.7).abs() < 1e-12
    }

    pub fn theta(&self) -> Option<f64> {
        self.is_default_lambda().then_some(ARCH_THETA_07)
    }

    pub fn kappa_prime(&self) -> Result<f64> {
        match self.kappa_prime {
            Some(k) if k > 0.0 => Ok(k),
            Some(k) => Err(Error::param(format!("kappa' must be positive, got {k}"))),
            None if self.is_default_lambda() => Ok(ARCH_KAPPA_PRIME_07),
            None => Err(Error::param(format!(
                "no tabulated kappa' for ARCH lambda = {}; supply it explicitly",
                self.lambda
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::param(format!(
                "ARCH lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if self.burn_in < 1000 {
            return Err(Error::param(format!(
                "ARCH burn-in must be at least 1000, got {}",
                self.burn_in
            )));
        }
        Ok(())
    }
}

fn arch_path<R: Rng>(rng: &mut R, n: usize, lambda: f64, burn_in: usize) -> Vec<f64> {
    let mut w = 0.0f64;
    for _ in 0..burn_in {
        let v: f64 = rng.sample(StandardNormal);
        w = (ARCH_INTERCEPT + lambda * w * w).sqrt() * v;
    }
    (0..n)
        .map(|_| {
            let v: f64 = rng.sample(StandardNormal);
            w = (ARCH_INTERCEPT + lambda * w * w).sqrt() * v;
            w
        })
        .collect()
}

/// Quantile table of the stationary ARCH(1) law from one long burned-in path.
pub fn generate_arch_quantile_table(lambda: f64, n_sim: usize, seed: u64) -> Result<QuantileTable> {
    ArchParams::new(lambda).validate()?;
    let mut sample = arch_path(&mut rng_stream(seed, 0), n_sim, lambda, default_burn_in());
    QuantileTable::from_sample(&mut sample, &default_levels(), seed)
}

/// The shipped table for `λ = 0.7`.
pub fn builtin_arch_table() -> Arc<QuantileTable> {
    static TABLE: OnceLock<Arc<QuantileTable>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            Arc::new(
                QuantileTable::read_csv(BUILTIN_TABLE_CSV.as_bytes())
                    .expect("shipped ARCH quantile table is well formed"),
            )
        })
        .clone()
}

/// Reference table for `λ`: the shipped one for 0.7, otherwise simulated with 10^6 draws.
pub fn arch_reference_table(lambda: f64) -> Result<Arc<QuantileTable>> {
    if (lambda - 0.7).abs() < 1e-12 {
        Ok(builtin_arch_table())
    } else {
        generate_arch_quantile_table(lambda, 1_000_000, BUILTIN_TABLE_SEED).map(Arc::new)
    }
}

pub(crate) fn arch_with<R: Rng>(
    rng: &mut R,
    n: usize,
    params: &ArchParams,
    family: &ScedasisFamily,
) -> Result<SimOutput> {
    params.validate()?;
    if n < 2 {
        return Err(Error::param("n must be at least 2"));
    }
    let kappa = params.kappa_prime()?;
    // |W| is regularly varying with index 2κ', so c^e rescales the tail by c^{2κ'e}
    let (exponent, power) = match params.exponent {
        ScaleExponent::Kappa => (1.0 / kappa, 2.0),
        ScaleExponent::TailMatched => (1.0 / (2.0 * kappa), 1.0),
    };
    let table = arch_reference_table(params.lambda)?;
    let threshold = table.quantile(THRESHOLD_LEVEL);
    let w = arch_path(rng, n, params.lambda, params.burn_in);
    let x = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let s = (i + 1) as f64 / n as f64;
            family
                .scedasis_value(s, Some((wi, threshold)))
                .map(|factor| factor.powf(exponent) * wi)
        })
        .collect::<Result<Vec<_>>>()?;
    let u = w.iter().map(|&wi| table.cdf(wi)).collect();
    Ok(SimOutput {
        x,
        w,
        u,
        truth: TruthModel {
            reference: ReferenceLaw::Tabulated(table),
            scedasis: EffectiveScedasis::new(*family, power),
            theta: params.theta(),
        },
    })
}

/// ARCH(1) scale model `X_i = c(i/n)^{e} W_i` (or its threshold variant).
pub fn simulate_arch(
    n: usize,
    params: &ArchParams,
    family: &ScedasisFamily,
    seed: u64,
) -> Result<SimOutput> {
    arch_with(&mut rng_stream(seed, 0), n, params, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::family::FamilyKind;
    use crate::simulate::ks_distance_uniform;

    #[test]
    fn parameter_checks() {
        let fam = ScedasisFamily::homoscedastic();
        assert!(simulate_arch(10, &ArchParams::new(1.0), &fam, 1).is_err());
        assert!(simulate_arch(10, &ArchParams::new(0.0), &fam, 1).is_err());
        // no shipped kappa' for lambda = 0.5
        assert!(simulate_arch(10, &ArchParams::new(0.5), &fam, 1).is_err());
        let mut short = ArchParams::new(0.7);
        short.burn_in = 10;
        assert!(simulate_arch(10, &short, &fam, 1).is_err());
    }

    #[test]
    fn builtin_table_metadata() {
        let t = builtin_arch_table();
        assert_eq!(t.n_sim(), BUILTIN_TABLE_DRAWS as u64);
        assert_eq!(t.seed(), BUILTIN_TABLE_SEED);
        // symmetric law: the median is near 0 and quartiles mirror each other
        assert!(t.quantile(0.5).abs() < 1e-4);
        assert!((t.quantile(0.25) + t.quantile(0.75)).abs() < 2e-4);
    }

    #[test]
    fn symmetric_signs() {
        let fam = ScedasisFamily::homoscedastic();
        let out = simulate_arch(100_000, &ArchParams::new(0.7), &fam, 17).unwrap();
        let n = out.w.len() as f64;
        let mean_sign = out.w.iter().map(|w| w.signum()).sum::<f64>() / n;
        assert!(mean_sign.abs() < 3.0 / n.sqrt());
    }

    #[test]
    fn uniformised_marginal() {
        let fam = ScedasisFamily::homoscedastic();
        let out = simulate_arch(100_000, &ArchParams::new(0.7), &fam, 19).unwrap();
        assert!(ks_distance_uniform(&out.u) < 0.01);
    }

    #[test]
    fn scale_exponents() {
        let fam = ScedasisFamily::new(FamilyKind::C1, 0.5).unwrap();
        let p = ArchParams::new(0.7);
        let out = simulate_arch(400, &p, &fam, 23).unwrap();
        for (i, (x, w)) in out.x.iter().zip(&out.w).enumerate() {
            let s = (i + 1) as f64 / 400.0;
            assert!((x - fam.value(s).powf(1.0 / ARCH_KAPPA_PRIME_07) * w).abs() < 1e-15);
        }
        assert!((out.truth.scedasis.power - 2.0).abs() < 1e-12);
        let matched = simulate_arch(400, &p.clone().with_exponent(ScaleExponent::TailMatched), &fam, 23).unwrap();
        assert!((matched.truth.scedasis.power - 1.0).abs() < 1e-12);
        assert_eq!(matched.w, out.w);
    }
}
