use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scedasis::{cn_process_l2, integrated_scedasis, Series};
use crate::simulate::{rng_stream, StreamRng};
use crate::testing::bootstrap::{bootstrap_process, check_blocks, path_statistic};
use crate::testing::{
    check_alpha, empirical_quantile, ConfigEcho, Multiplier, MultiplierDraw, Reference, Statistic,
    TestKind, TestReport,
};

pub const DEFAULT_PATHS: usize = 200_000;
pub const DEFAULT_GRID: usize = 2000;
pub const DEFAULT_SEED: u64 = 4_242_001;
pub const DEFAULT_ALPHAS: [f64; 5] = [0.01, 0.025, 0.05, 0.1, 0.2];

/// 0.95 quantile of `∫_0^1 𝔹(s)^2 ds` for a Brownian bridge `𝔹`.
pub const EDHZ_QUANTILE_095: f64 = 0.461_36;

const BUILTIN_CSV: &str = include_str!("../../data/selfnorm_quantiles.csv");

/// Upper `α` quantiles `q_S(1-α)`, `q_T(1-α)` of the self-normalised limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfNormRow {
    pub alpha: f64,
    #[serde(rename = "q_S")]
    pub q_s: f64,
    #[serde(rename = "q_T")]
    pub q_t: f64,
    pub paths: usize,
    pub grid: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfNormQuantiles {
    rows: Vec<SelfNormRow>,
}

impl SelfNormQuantiles {
    pub fn from_rows(rows: Vec<SelfNormRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("quantile table has no rows"));
        }
        Ok(SelfNormQuantiles { rows })
    }

    /// The shipped table (200 000 paths on a 2000-step grid).
    pub fn builtin() -> &'static SelfNormQuantiles {
        static TABLE: OnceLock<SelfNormQuantiles> = OnceLock::new();
        TABLE.get_or_init(|| {
            SelfNormQuantiles::read_csv(BUILTIN_CSV.as_bytes())
                .expect("shipped self-normalisation table is well formed")
        })
    }

    pub fn rows(&self) -> &[SelfNormRow] {
        &self.rows
    }

    fn row(&self, alpha: f64) -> Result<&SelfNormRow> {
        self.rows
            .iter()
            .find(|r| (r.alpha - alpha).abs() < 1e-12)
            .ok_or_else(|| {
                let have: Vec<String> = self.rows.iter().map(|r| r.alpha.to_string()).collect();
                Error::param(format!(
                    "alpha = {alpha} is not tabulated (available: {})",
                    have.join(", ")
                ))
            })
    }

    pub fn q_s(&self, alpha: f64) -> Result<f64> {
        Ok(self.row(alpha)?.q_s)
    }

    pub fn q_t(&self, alpha: f64) -> Result<f64> {
        Ok(self.row(alpha)?.q_t)
    }

    pub fn quantile(&self, statistic: Statistic, alpha: f64) -> Result<f64> {
        match statistic {
            Statistic::Ks => self.q_s(alpha),
            Statistic::Cvm => self.q_t(alpha),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let rows = csv::Reader::from_reader(r)
            .deserialize()
            .collect::<std::result::Result<Vec<SelfNormRow>, _>>()?;
        SelfNormQuantiles::from_rows(rows)
    }

    fn matches(&self, alphas: &[f64], paths: usize, grid: usize, seed: u64) -> bool {
        self.rows
            .iter()
            .all(|r| r.paths == paths && r.grid == grid && r.seed == seed)
            && alphas.iter().all(|&a| self.row(a).is_ok())
    }

    /// Cache file for `(paths, grid, seed)` inside `dir`.
    pub fn cache_path(dir: &Path, paths: usize, grid: usize, seed: u64) -> PathBuf {
        dir.join(format!("selfnorm_p{paths}_g{grid}_s{seed}.csv"))
    }

    /// Reads the cached table for `(paths, grid, seed)`, simulating and writing it on a miss.
    pub fn load_or_compute(dir: &Path, alphas: &[f64], paths: usize, grid: usize, seed: u64) -> Result<Self> {
        let file = Self::cache_path(dir, paths, grid, seed);
        if file.exists() {
            let cached = Self::read_csv(fs::File::open(&file)?)?;
            if cached.matches(alphas, paths, grid, seed) {
                return Ok(cached);
            }
        }
        let table = selfnorm_reference_quantiles(alphas, paths, grid, seed)?;
        fs::create_dir_all(dir)?;
        table.write_csv(fs::File::create(&file)?)?;
        Ok(table)
    }
}

/// A Brownian bridge on `grid + 1` equispaced points, written into `out`.
fn bridge(rng: &mut StreamRng, grid: usize, out: &mut Vec<f64>) {
    out.clear();
    let sd = (1.0 / grid as f64).sqrt();
    let mut w = 0.0;
    out.push(0.0);
    for _ in 0..grid {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        out.push(w);
    }
    let w1 = w;
    for (j, v) in out.iter_mut().enumerate() {
        *v -= (j as f64 / grid as f64) * w1;
    }
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn trapezoid_sq(v: &[f64]) -> f64 {
    let g = (v.len() - 1) as f64;
    let inner: f64 = v.windows(2).map(|w| w[0] * w[0] + w[1] * w[1]).sum();
    inner / (2.0 * g)
}

fn check_sim(paths: usize, grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::param(format!("grid size must be at least 2, got {grid}")));
    }
    if grid < 500 {
        return Err(Error::param(format!("grid size must be at least 500, got {grid}")));
    }
    if paths < 10_000 {
        return Err(Error::param(format!("need at least 10^4 paths, got {paths}")));
    }
    Ok(())
}

/// Draws of `(S_2, T_2)`, one independent bridge triple per path and stream.
pub fn selfnorm_reference_samples(paths: usize, grid: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sim(paths, grid)?;
    let draws: Vec<(f64, f64)> = (0..paths as u64)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new()),
            |(b1, b2, b3), p| {
                let mut rng = rng_stream(seed, p);
                bridge(&mut rng, grid, b1);
                bridge(&mut rng, grid, b2);
                bridge(&mut rng, grid, b3);
                for (x, y) in b2.iter_mut().zip(b3.iter()) {
                    *x -= y;
                }
                (sup_abs(b1) / sup_abs(b2), trapezoid_sq(b1) / trapezoid_sq(b2))
            },
        )
        .collect();
    Ok(draws.into_iter().unzip())
}

/// Quantiles of `S_2 = ‖𝔹‖_∞ / ‖𝔹^{(1)} - 𝔹^{(2)}‖_∞` and the squared-`L²` analogue `T_2`.
pub fn selfnorm_reference_quantiles(
    alphas: &[f64],
    paths: usize,
    grid: usize,
    seed: u64,
) -> Result<SelfNormQuantiles> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let (s2, t2) = selfnorm_reference_samples(paths, grid, seed)?;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            Ok(SelfNormRow {
                alpha,
                q_s: empirical_quantile(&s2, alpha)?,
                q_t: empirical_quantile(&t2, alpha)?,
                paths,
                grid,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SelfNormQuantiles::from_rows(rows)
}

/// Upper `α` quantile of `∫ 𝔹^2` by simulation.
pub fn bridge_cvm_quantile(alpha: f64, paths: usize, grid: usize, seed: u64) -> Result<f64> {
    check_alpha(alpha)?;
    check_sim(paths, grid)?;
    let draws: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map_init(Vec::new, |b, p| {
            bridge(&mut rng_stream(seed, p), grid, b);
            trapezoid_sq(b)
        })
        .collect();
    empirical_quantile(&draws, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfNormConfig {
    pub r: usize,
    #[serde(default)]
    pub multiplier: Multiplier,
    pub alpha: f64,
    pub seed: u64,
}

impl SelfNormConfig {
    pub fn new(r: usize, alpha: f64, seed: u64) -> Self {
        SelfNormConfig {
            r,
            multiplier: Multiplier::Rademacher,
            alpha,
            seed,
        }
    }
}

fn ratio_decision(numerator: f64, denominator: f64, quantile: f64) -> Result<(f64, bool)> {
    if denominator == 0.0 {
        return Err(Error::degenerate(
            "self-normaliser is zero; the test is uninformative for this series",
        ));
    }
    let stat = numerator / denominator;
    Ok((stat, stat > quantile))
}

/// Both self-normalised tests from the same two multiplier draws (streams 0 and 1 of `seed`).
pub fn selfnorm_tests(
    series: &Series,
    k: usize,
    cfg: &SelfNormConfig,
    quantiles: &SelfNormQuantiles,
) -> Result<(TestReport, TestReport)> {
    let n = series.len();
    let m = check_blocks(n, cfg.r)?;
    check_alpha(cfg.alpha)?;
    let process = integrated_scedasis(series, k)?;
    let d1 = MultiplierDraw::sample(cfg.multiplier, m, &mut rng_stream(cfg.seed, 0));
    let d2 = MultiplierDraw::sample(cfg.multiplier, m, &mut rng_stream(cfg.seed, 1));
    let diff = bootstrap_process(&process, &d1, cfg.r)?.difference(&bootstrap_process(&process, &d2, cfg.r)?);
    let cn = process.cn_path();
    let echo = ConfigEcho {
        n,
        k,
        r: Some(cfg.r),
        replicates: None,
        multiplier: Some(cfg.multiplier),
        alpha: cfg.alpha,
        seed: Some(cfg.seed),
    };
    let make = |statistic: Statistic, kind: TestKind| -> Result<TestReport> {
        let quantile = quantiles.quantile(statistic, cfg.alpha)?;
        let row = quantiles.row(cfg.alpha)?;
        let (observed, reject) = ratio_decision(
            path_statistic(&cn, statistic),
            path_statistic(&diff, statistic),
            quantile,
        )?;
        Ok(TestReport {
            statistic: kind,
            observed,
            reference: Reference::Fixed {
                quantile,
                source: format!(
                    "brownian bridges: paths={}, grid={}, seed={}",
                    row.paths, row.grid, row.seed
                ),
            },
            p_value: None,
            reject,
            config: echo.clone(),
        })
    };
    Ok((make(Statistic::Ks, TestKind::KsSelfnorm)?, make(Statistic::Cvm, TestKind::CvmSelfnorm)?))
}

/// Self-normalised test based on `S_{n,2}` or `T_{n,2}`.
pub fn selfnorm_test(
    series: &Series,
    k: usize,
    cfg: &SelfNormConfig,
    statistic: Statistic,
    quantiles: &SelfNormQuantiles,
) -> Result<TestReport> {
    let (ks, cvm) = selfnorm_tests(series, k, cfg, quantiles)?;
    Ok(match statistic {
        Statistic::Ks => ks,
        Statistic::Cvm => cvm,
    })
}

/// Cramér–von Mises test for independent data: rejects when `T_{n,1}` exceeds the
/// 0.95 quantile of `∫ 𝔹^2`.
pub fn edhz_test(series: &Series, k: usize, cvm_quantile_095: f64) -> Result<TestReport> {
    let process = integrated_scedasis(series, k)?;
    let observed = cn_process_l2(&process);
    Ok(TestReport {
        statistic: TestKind::CvmIndep,
        observed,
        reference: Reference::Fixed {
            quantile: cvm_quantile_095,
            source: "0.95 quantile of the Brownian bridge Cramér–von Mises law".into(),
        },
        p_value: None,
        reject: observed > cvm_quantile_095,
        config: ConfigEcho {
            n: series.len(),
            k,
            r: None,
            replicates: None,
            multiplier: None,
            alpha: 0.05,
            seed: None,
        },
    })
}
