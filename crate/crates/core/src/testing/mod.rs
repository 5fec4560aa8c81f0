//! Tests of the null hypothesis of homoscedastic extremes, `c ≡ 1`.
//!
//! All statistics are functionals of the exact step/affine representation of
//! `ℂ_n` and of its multiplier-bootstrap analogues, so the tests depend on the
//! data only through the exceedance indicators and the block structure.

mod bootstrap;
mod selfnorm;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bootstrap::{bootstrap_process, bootstrap_test, bootstrap_tests, BootstrapConfig, MIN_REPLICATES};
pub use selfnorm::{
    selfnorm_reference_samples,
    bridge_cvm_quantile, edhz_test, selfnorm_reference_quantiles, selfnorm_test, selfnorm_tests,
    SelfNormConfig, SelfNormQuantiles, SelfNormRow, DEFAULT_ALPHAS, DEFAULT_GRID, DEFAULT_PATHS,
    DEFAULT_SEED, EDHZ_QUANTILE_095,
};

/// Which functional of `ℂ_n` is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Kolmogorov–Smirnov type, the sup norm.
    Ks,
    /// Cramér–von Mises type, the squared `L²` norm.
    Cvm,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(Statistic::Ks),
            "cvm" => Ok(Statistic::Cvm),
            other => Err(Error::param(format!("unknown statistic '{other}' (ks or cvm)"))),
        }
    }
}

/// Name of a test in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "KS-boot")]
    KsBoot,
    #[serde(rename = "CvM-boot")]
    CvmBoot,
    #[serde(rename = "KS-selfnorm")]
    KsSelfnorm,
    #[serde(rename = "CvM-selfnorm")]
    CvmSelfnorm,
    #[serde(rename = "CvM-indep")]
    CvmIndep,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::KsBoot => "KS-boot",
            TestKind::CvmBoot => "CvM-boot",
            TestKind::KsSelfnorm => "KS-selfnorm",
            TestKind::CvmSelfnorm => "CvM-selfnorm",
            TestKind::CvmIndep => "CvM-indep",
        })
    }
}

/// Law of the bootstrap multipliers: centred, unit variance, bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    #[default]
    Rademacher,
    /// Mammen's two-point law on `(1 ∓ √5)/2`.
    Mammen,
    /// Uniform on `[-√3, √3]`.
    Uniform,
}

impl Multiplier {
    /// Almost-sure bound `M` with `|ξ| ≤ M`.
    pub fn bound(self) -> f64 {
        match self {
            Multiplier::Rademacher => 1.0,
            Multiplier::Mammen => (1.0 + 5f64.sqrt()) / 2.0,
            Multiplier::Uniform => 3f64.sqrt(),
        }
    }

    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            Multiplier::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Multiplier::Mammen => {
                let r5 = 5f64.sqrt();
                if rng.gen::<f64>() < (r5 + 1.0) / (2.0 * r5) {
                    (1.0 - r5) / 2.0
                } else {
                    (1.0 + r5) / 2.0
                }
            }
            Multiplier::Uniform => {
                let b = 3f64.sqrt();
                rng.gen_range(-b..=b)
            }
        }
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rademacher" => Ok(Multiplier::Rademacher),
            "mammen" => Ok(Multiplier::Mammen),
            "uniform" => Ok(Multiplier::Uniform),
            other => Err(Error::param(format!("unknown multiplier law '{other}'"))),
        }
    }
}

/// One vector of block multipliers `ξ_1, ..., ξ_m` and its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierDraw {
    xi: Vec<f64>,
    mean: f64,
}

impl MultiplierDraw {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        if xi.is_empty() || xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("multipliers must be a non-empty finite vector"));
        }
        let mean = xi.iter().sum::<f64>() / xi.len() as f64;
        Ok(MultiplierDraw { xi, mean })
    }

    pub fn sample<R: Rng>(law: Multiplier, m: usize, rng: &mut R) -> Self {
        let xi: Vec<f64> = (0..m).map(|_| law.sample(rng)).collect();
        let mean = xi.iter().sum::<f64>() / m as f64;
        MultiplierDraw { xi, mean }
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Summary of a replicate distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl ReplicateSummary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count.max(1) as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        ReplicateSummary {
            count,
            mean,
            sd: var.sqrt(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// What the observed statistic is compared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Reference {
    Bootstrap {
        quantile: f64,
        summary: ReplicateSummary,
        replicates: Vec<f64>,
    },
    Fixed {
        quantile: f64,
        source: String,
    },
}

impl Reference {
    pub fn quantile(&self) -> f64 {
        match self {
            Reference::Bootstrap { quantile, .. } | Reference::Fixed { quantile, .. } => *quantile,
        }
    }
}

/// Echo of the configuration that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Multiplier>,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: TestKind,
    pub observed: f64,
    pub reference: Reference,
    pub p_value: Option<f64>,
    pub reject: bool,
    pub config: ConfigEcho,
}

impl TestReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Order statistic with one-based index `⌈(1-α)B⌉` of the replicates.
pub fn empirical_quantile(replicates: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if replicates.is_empty() {
        return Err(Error::param("no replicates"));
    }
    let b = replicates.len();
    // the small offset keeps e.g. 0.95 * 200 from rounding up to 191
    let idx = (((1.0 - alpha) * b as f64 - 1e-9).ceil() as usize).clamp(1, b);
    let mut sorted = replicates.to_vec();
    let (_, q, _) = sorted.select_nth_unstable_by(idx - 1, f64::total_cmp);
    Ok(*q)
}

/// `(1 + #{replicates ≥ observed}) / (B + 1)`.
pub fn bootstrap_p_value(replicates: &[f64], observed: f64) -> f64 {
    let ge = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + ge) as f64 / (replicates.len() + 1) as f64
}
