use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::scedasis::{cn_process_l2, cn_process_sup, integrated_scedasis, Series, SequentialProcess};
use crate::simulate::rng_stream;
use crate::testing::{
    bootstrap_p_value, check_alpha, empirical_quantile, ConfigEcho, Multiplier, MultiplierDraw,
    Reference, ReplicateSummary, Statistic, TestKind, TestReport,
};

/// Fewer replicates make the empirical quantile meaningless.
pub const MIN_REPLICATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Block length `r`.
    pub r: usize,
    /// Number of replicates `B`.
    pub replicates: usize,
    #[serde(default)]
    pub multiplier: Multiplier,
    pub alpha: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(r: usize, replicates: usize, alpha: f64, seed: u64) -> Self {
        BootstrapConfig {
            r,
            replicates,
            multiplier: Multiplier::Rademacher,
            alpha,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_blocks(n, self.r)?;
        check_alpha(self.alpha)?;
        if self.replicates < MIN_REPLICATES {
            return Err(Error::param(format!(
                "B = {} replicates is too few for a reliable quantile (need >= {MIN_REPLICATES})",
                self.replicates
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_blocks(n: usize, r: usize) -> Result<usize> {
    if r == 0 || r >= n {
        return Err(Error::param(format!("block length must satisfy 1 <= r < n = {n}, got {r}")));
    }
    let m = n / r;
    if m < 2 {
        return Err(Error::param(format!("need at least 2 blocks, got m = {m}")));
    }
    Ok(m)
}

/// Exact step representation of `ℂ_{n,ξ}(s) = 𝔻_{n,ξ}(s) - Ĉ_n(s) 𝔻_{n,ξ}(1)`.
///
/// Exceedances in the trailing partial block (index `> mr`) do not enter `𝔻_{n,ξ}`.
pub fn bootstrap_process(
    process: &SequentialProcess,
    draw: &MultiplierDraw,
    r: usize,
) -> Result<PiecewisePath> {
    let n = process.n();
    let m = check_blocks(n, r)?;
    if draw.len() != m {
        return Err(Error::param(format!(
            "expected {m} multipliers for block length {r}, got {}",
            draw.len()
        )));
    }
    let jumps = process.jumps();
    let k = process.k() as f64;
    let rk = k.sqrt();
    let (xi, xbar) = (draw.values(), draw.mean());
    let mut cum = Vec::with_capacity(jumps.len() + 1);
    cum.push(0.0);
    let mut d = 0.0;
    for &i in jumps {
        if i <= m * r {
            d += (xi[(i - 1) / r] - xbar) / rk;
        }
        cum.push(d);
    }
    let d1 = d;
    let mut knots = Vec::with_capacity(jumps.len() + 1);
    knots.push(0.0);
    knots.extend(jumps.iter().map(|&i| i as f64 / n as f64));
    let levels = cum
        .iter()
        .enumerate()
        .map(|(c, &dc)| dc - (c as f64 / k) * d1)
        .collect();
    Ok(PiecewisePath::new(knots, levels, 0.0))
}

fn observed(process: &SequentialProcess, statistic: Statistic) -> f64 {
    match statistic {
        Statistic::Ks => cn_process_sup(process),
        Statistic::Cvm => cn_process_l2(process),
    }
}

pub(crate) fn path_statistic(path: &PiecewisePath, statistic: Statistic) -> f64 {
    match statistic {
        Statistic::Ks => path.sup_abs(),
        Statistic::Cvm => path.l2(),
    }
}

fn report(
    kind: TestKind,
    obs: f64,
    replicates: Vec<f64>,
    echo: ConfigEcho,
) -> Result<TestReport> {
    let quantile = empirical_quantile(&replicates, echo.alpha)?;
    Ok(TestReport {
        statistic: kind,
        observed: obs,
        p_value: Some(bootstrap_p_value(&replicates, obs)),
        reject: obs > quantile,
        reference: Reference::Bootstrap {
            quantile,
            summary: ReplicateSummary::of(&replicates),
            replicates,
        },
        config: echo,
    })
}

/// Both bootstrap tests (KS, CvM) from one set of `B` multiplier draws.
///
/// Replicate `b` uses the stream `(seed, b)`, so the result does not depend on
/// how the replicates are scheduled.
pub fn bootstrap_tests(series: &Series, k: usize, cfg: &BootstrapConfig) -> Result<(TestReport, TestReport)> {
    let n = series.len();
    cfg.validate(n)?;
    let process = integrated_scedasis(series, k)?;
    let m = n / cfg.r;
    let reps = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let draw = MultiplierDraw::sample(cfg.multiplier, m, &mut rng_stream(cfg.seed, b));
            let path = bootstrap_process(&process, &draw, cfg.r)?;
            Ok((path.sup_abs(), path.l2()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ks, cvm): (Vec<f64>, Vec<f64>) = reps.into_iter().unzip();
    let echo = ConfigEcho {
        n,
        k,
        r: Some(cfg.r),
        replicates: Some(cfg.replicates),
        multiplier: Some(cfg.multiplier),
        alpha: cfg.alpha,
        seed: Some(cfg.seed),
    };
    Ok((
        report(TestKind::KsBoot, observed(&process, Statistic::Ks), ks, echo.clone())?,
        report(TestKind::CvmBoot, observed(&process, Statistic::Cvm), cvm, echo)?,
    ))
}

/// Multiplier block bootstrap test based on `S_{n,1}` or `T_{n,1}`.
pub fn bootstrap_test(
    series: &Series,
    k: usize,
    cfg: &BootstrapConfig,
    statistic: Statistic,
) -> Result<TestReport> {
    let (ks, cvm) = bootstrap_tests(series, k, cfg)?;
    Ok(match statistic {
        Statistic::Ks => ks,
        Statistic::Cvm => cvm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate_armax, ScedasisFamily};

    fn toy() -> SequentialProcess {
        integrated_scedasis(&Series::new(vec![1.0, 4.0, 2.0, 3.0]).unwrap(), 2).unwrap()
    }

    #[test]
    fn hand_enumerated_example() {
        let draw = MultiplierDraw::new(vec![1.0, -1.0]).unwrap();
        let path = bootstrap_process(&toy(), &draw, 2).unwrap();
        let d_half = 2f64.powf(-0.5);
        // 𝔻(1) = 0, so ℂ_{n,ξ} = 𝔻
        assert!((path.value(0.5) - d_half).abs() < 1e-15);
        assert!(path.value(1.0).abs() < 1e-15);
        assert_eq!(path.value(0.25), 0.0);
    }

    #[test]
    fn constant_multipliers_vanish() {
        let out = simulate_armax(500, 0.25, &ScedasisFamily::homoscedastic(), 3).unwrap();
        let process = integrated_scedasis(&out.series().unwrap(), 50).unwrap();
        let draw = MultiplierDraw::new(vec![1.0; 125]).unwrap();
        let path = bootstrap_process(&process, &draw, 4).unwrap();
        assert_eq!(path.sup_abs(), 0.0);
    }

    #[test]
    fn endpoints_vanish_without_ties() {
        let out = simulate_armax(503, 0.0, &ScedasisFamily::homoscedastic(), 4).unwrap();
        let process = integrated_scedasis(&out.series().unwrap(), 60).unwrap();
        let mut rng = rng_stream(1, 0);
        let draw = MultiplierDraw::sample(Multiplier::Rademacher, 503 / 4, &mut rng);
        let path = bootstrap_process(&process, &draw, 4).unwrap();
        assert_eq!(path.value(0.0), 0.0);
        assert!(path.value(1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_block_is_excluded() {
        // n = 5, r = 2: the exceedance at index 5 lies beyond mr = 4
        let s = Series::new(vec![0.0, 0.0, 0.0, 0.0, 9.0]).unwrap();
        let process = integrated_scedasis(&s, 1).unwrap();
        let draw = MultiplierDraw::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(bootstrap_process(&process, &draw, 2).unwrap().sup_abs(), 0.0);
    }

    #[test]
    fn rejects_bad_configuration() {
        let s = Series::new((0..100).map(f64::from).collect()).unwrap();
        assert!(bootstrap_test(&s, 10, &BootstrapConfig::new(4, 19, 0.05, 1), Statistic::Cvm).is_err());
        assert!(bootstrap_test(&s, 10, &BootstrapConfig::new(100, 50, 0.05, 1), Statistic::Cvm).is_err());
        assert!(bootstrap_test(&s, 10, &BootstrapConfig::new(60, 50, 0.05, 1), Statistic::Cvm).is_err());
        assert!(bootstrap_test(&s, 10, &BootstrapConfig::new(4, 50, 1.0, 1), Statistic::Cvm).is_err());
        let draw = MultiplierDraw::new(vec![1.0; 3]).unwrap();
        let process = integrated_scedasis(&s, 10).unwrap();
        assert!(bootstrap_process(&process, &draw, 4).is_err());
    }

    #[test]
    fn report_consistency() {
        let out = simulate_armax(1000, 0.0, &ScedasisFamily::homoscedastic(), 8).unwrap();
        let s = out.series().unwrap();
        let cfg = BootstrapConfig::new(4, 100, 0.05, 77);
        let (ks, cvm) = bootstrap_tests(&s, 100, &cfg).unwrap();
        for rep in [&ks, &cvm] {
            let p = rep.p_value.unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert_eq!(rep.reject, rep.observed > rep.reference.quantile());
        }
        let again = bootstrap_test(&s, 100, &cfg, Statistic::Cvm).unwrap();
        assert_eq!(again, cvm);
    }
}
