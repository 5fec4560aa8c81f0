//! Estimation of the scedasis function `c` and of its integral `C`.
//!
//! Both estimators only look at which observations exceed the order statistic
//! `X_{n,n-k}`, so every quantity in this module is invariant under strictly
//! increasing transformations of the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BoundaryKernel;
use crate::path::PiecewisePath;

/// Default truncation floor for `ĉ_n = max(c̃_n, κ)`.
pub const DEFAULT_KAPPA: f64 = 0.1;

/// An observed series `X_1, ..., X_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param(format!(
                "a series needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "observation {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Series { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `f` to every observation.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Series> {
        Series::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < n = {n}, got {k}")));
    }
    Ok(())
}

/// Exceedances of the threshold `X_{n,n-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedances {
    pub threshold: f64,
    pub indicators: Vec<bool>,
    pub k: usize,
}

impl Exceedances {
    /// Number of strict exceedances; smaller than `k` only under ties.
    pub fn count(&self) -> usize {
        self.indicators.iter().filter(|&&b| b).count()
    }

    /// One-based positions `i` with `X_i > X_{n,n-k}`, increasing.
    pub fn positions(&self) -> Vec<usize> {
        self.indicators
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }
}

/// The order statistic `X_{n,n-k}` (ascending convention, one-based) and the
/// indicators `1(X_i > X_{n,n-k})`.
pub fn exceedance_indicators(series: &Series, k: usize) -> Result<Exceedances> {
    let n = series.len();
    check_k(k, n)?;
    let mut scratch = series.values().to_vec();
    let (_, &mut threshold, _) = scratch.select_nth_unstable_by(n - k - 1, |a, b| a.total_cmp(b));
    let indicators = series.values().iter().map(|&v| v > threshold).collect();
    Ok(Exceedances {
        threshold,
        indicators,
        k,
    })
}

/// Parameters of the kernel scedasis estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScedasisConfig {
    pub k: usize,
    pub h: f64,
    pub kappa: f64,
    pub grid: Vec<f64>,
}

impl ScedasisConfig {
    /// `k`, `h` and κ with the default evaluation grid.
    pub fn new(k: usize, h: f64, kappa: f64) -> Self {
        ScedasisConfig {
            k,
            h,
            kappa,
            grid: default_grid(),
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_k(self.k, n)?;
        if !(self.h > 0.0 && self.h < 0.5) {
            return Err(Error::param(format!("h must lie in (0, 1/2), got {}", self.h)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::param(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.grid.is_empty() {
            return Err(Error::param("evaluation grid is empty"));
        }
        if self.grid.iter().any(|s| !(0.0..=1.0).contains(s))
            || self.grid.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::param("grid must be sorted and lie within [0, 1]"));
        }
        Ok(())
    }
}

/// 512 equispaced interior points plus the endpoints 0 and 1.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(514)
}

/// `points` equispaced points from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

/// Kernel estimator `c̃_n(s) = (kh)^{-1} Σ_i 1(X_i > X_{n,n-k}) K_b((s - i/n)/h, s)`,
/// evaluable at arbitrary `s`.
#[derive(Debug, Clone)]
pub struct ScedasisEstimator<'a> {
    n: usize,
    k: usize,
    positions: Vec<f64>,
    exceedances: Exceedances,
    kernel: &'a BoundaryKernel,
}

impl<'a> ScedasisEstimator<'a> {
    pub fn new(series: &Series, k: usize, kernel: &'a BoundaryKernel) -> Result<Self> {
        let exceedances = exceedance_indicators(series, k)?;
        let n = series.len();
        let positions = exceedances
            .positions()
            .into_iter()
            .map(|i| i as f64 / n as f64)
            .collect();
        Ok(ScedasisEstimator {
            n,
            k,
            positions,
            exceedances,
            kernel,
        })
    }

    pub fn exceedances(&self) -> &Exceedances {
        &self.exceedances
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c̃_n(s)`.
    pub fn tilde(&self, s: f64) -> Result<f64> {
        let h = self.kernel.bandwidth();
        let corr = self.kernel.correction(s)?;
        let lo = self.positions.partition_point(|&t| t < s - h);
        let hi = self.positions.partition_point(|&t| t <= s + h);
        let sum: f64 = self.positions[lo..hi]
            .iter()
            .map(|&t| self.kernel.evaluate_with(corr, (s - t) / h))
            .sum();
        Ok(sum / (self.k as f64 * h))
    }

    /// `ĉ_n(s) = max(c̃_n(s), κ)`.
    pub fn truncated(&self, s: f64, kappa: f64) -> Result<f64> {
        Ok(self.tilde(s)?.max(kappa))
    }

    pub fn curve(&self, grid: &[f64], kappa: f64) -> Result<ScedasisCurve> {
        if grid.is_empty() {
            return Err(Error::param("evaluation grid is empty"));
        }
        let tilde = grid.iter().map(|&s| self.tilde(s)).collect::<Result<Vec<_>>>()?;
        let hat = tilde.iter().map(|&c| c.max(kappa)).collect();
        Ok(ScedasisCurve {
            grid: grid.to_vec(),
            tilde,
            hat,
            k: self.k,
            h: self.kernel.bandwidth(),
            kappa,
            exceedance_count: self.exceedances.count(),
        })
    }
}

/// `c̃_n` and `ĉ_n` on a grid, with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScedasisCurve {
    pub grid: Vec<f64>,
    pub tilde: Vec<f64>,
    pub hat: Vec<f64>,
    pub k: usize,
    pub h: f64,
    pub kappa: f64,
    /// Differs from `k` only when ties sit at the threshold.
    pub exceedance_count: usize,
}

impl ScedasisCurve {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "c_tilde", "c_hat"])?;
        for ((s, t), c) in self.grid.iter().zip(&self.tilde).zip(&self.hat) {
            out.write_record([s.to_string(), t.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn scedasis_estimate(
    series: &Series,
    cfg: &ScedasisConfig,
    kernel: &BoundaryKernel,
) -> Result<ScedasisCurve> {
    cfg.validate(series.len())?;
    if (kernel.bandwidth() - cfg.h).abs() > 1e-15 {
        return Err(Error::param(format!(
            "kernel bandwidth {} differs from configured h = {}",
            kernel.bandwidth(),
            cfg.h
        )));
    }
    ScedasisEstimator::new(series, cfg.k, kernel)?.curve(&cfg.grid, cfg.kappa)
}

/// The step function `Ĉ_n(s) = k^{-1} Σ_{i ≤ ⌊ns⌋} 1(X_i > X_{n,n-k})`
/// and the centred process `ℂ_n(s) = √k (Ĉ_n(s) - s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialProcess {
    n: usize,
    k: usize,
    threshold: f64,
    /// One-based exceedance positions, increasing.
    jumps: Vec<usize>,
}

impl SequentialProcess {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn jumps(&self) -> &[usize] {
        &self.jumps
    }

    pub fn exceedance_count(&self) -> usize {
        self.jumps.len()
    }

    /// `Ĉ_n(s)` using the integer floor `⌊ns⌋`.
    pub fn c_hat(&self, s: f64) -> f64 {
        let upto = floor_index(self.n, s);
        self.count_upto(upto) as f64 / self.k as f64
    }

    /// Number of exceedances with index `<= i`.
    pub fn count_upto(&self, i: usize) -> usize {
        self.jumps.partition_point(|&j| j <= i)
    }

    /// `ℂ_n(s)`.
    pub fn cn(&self, s: f64) -> f64 {
        (self.k as f64).sqrt() * (self.c_hat(s) - s.clamp(0.0, 1.0))
    }

    /// Exact piecewise representation of `ℂ_n`.
    pub fn cn_path(&self) -> PiecewisePath {
        let rk = (self.k as f64).sqrt();
        let mut knots = Vec::with_capacity(self.jumps.len() + 1);
        let mut levels = Vec::with_capacity(self.jumps.len() + 1);
        knots.push(0.0);
        levels.push(0.0);
        for (c, &i) in self.jumps.iter().enumerate() {
            knots.push(i as f64 / self.n as f64);
            levels.push(rk * (c + 1) as f64 / self.k as f64);
        }
        PiecewisePath::new(knots, levels, rk)
    }
}

/// `⌊ns⌋` for `s` clamped to `[0, 1]`, consistent with the comparison `i/n <= s`
/// (plain `floor(n * s)` can land one short at `s = i/n`).
pub(crate) fn floor_index(n: usize, s: f64) -> usize {
    let s = s.clamp(0.0, 1.0);
    let mut i = ((n as f64 * s).floor() as usize).min(n);
    while i < n && (i + 1) as f64 / n as f64 <= s {
        i += 1;
    }
    while i > 0 && i as f64 / n as f64 > s {
        i -= 1;
    }
    i
}

pub fn integrated_scedasis(series: &Series, k: usize) -> Result<SequentialProcess> {
    let ex = exceedance_indicators(series, k)?;
    Ok(SequentialProcess {
        n: series.len(),
        k,
        threshold: ex.threshold,
        jumps: ex.positions(),
    })
}

/// `S_{n,1} = sup_s |ℂ_n(s)|`, exact.
pub fn cn_process_sup(process: &SequentialProcess) -> f64 {
    process.cn_path().sup_abs()
}

/// `T_{n,1} = ∫_0^1 ℂ_n(s)^2 ds`, exact.
pub fn cn_process_l2(process: &SequentialProcess) -> f64 {
    process.cn_path().l2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BoundaryKernel;

    fn series(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn series_validation() {
        assert!(Series::new(vec![1.0]).is_err());
        assert!(Series::new(vec![1.0, f64::NAN]).is_err());
        assert!(Series::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn indicators_small_example() {
        let ex = exceedance_indicators(&series(&[1.0, 4.0, 2.0, 3.0]), 2).unwrap();
        assert_eq!(ex.threshold, 2.0);
        assert_eq!(ex.indicators, vec![false, true, false, true]);
        assert_eq!(ex.count(), 2);
    }

    #[test]
    fn indicators_with_total_ties() {
        let ex = exceedance_indicators(&series(&[5.0; 4]), 2).unwrap();
        assert_eq!(ex.threshold, 5.0);
        assert!(ex.indicators.iter().all(|&b| !b));
    }

    #[test]
    fn indicators_k_n_minus_one() {
        let s = series(&[3.0, 1.0, 1.0, 7.0, 2.0]);
        let ex = exceedance_indicators(&s, 4).unwrap();
        assert_eq!(ex.indicators, vec![true, false, false, true, true]);
    }

    #[test]
    fn indicators_reject_bad_k() {
        let s = series(&[1.0, 2.0, 3.0]);
        assert!(exceedance_indicators(&s, 0).is_err());
        assert!(exceedance_indicators(&s, 3).is_err());
    }

    #[test]
    fn integrated_small_example() {
        let p = integrated_scedasis(&series(&[1.0, 4.0, 2.0, 3.0]), 2).unwrap();
        assert_eq!(p.c_hat(0.5), 0.5);
        assert_eq!(p.c_hat(0.0), 0.0);
        assert_eq!(p.c_hat(1.0), 1.0);
    }

    #[test]
    fn sup_and_l2_two_points() {
        // exceedance at i = 1: Ĉ_n = 0 on [0, 1/2), 1 on [1/2, 1]
        let p = integrated_scedasis(&series(&[2.0, 1.0]), 1).unwrap();
        assert!((cn_process_sup(&p) - 0.5).abs() < 1e-15);
        assert!((cn_process_l2(&p) - 1.0 / 12.0).abs() < 1e-15);
        // exceedance at i = n: the jump sits at s = 1 and ℂ_n(s) = -s before it
        let q = integrated_scedasis(&series(&[1.0, 2.0]), 1).unwrap();
        assert!((cn_process_sup(&q) - 1.0).abs() < 1e-15);
        assert!((cn_process_l2(&q) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_ties() {
        let p = integrated_scedasis(&series(&[1.0; 10]), 4).unwrap();
        assert_eq!(p.exceedance_count(), 0);
        assert!((cn_process_sup(&p) - 2.0).abs() < 1e-15);
        assert!((cn_process_l2(&p) - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_estimate_single_term() {
        // one exceedance at i/n = 0.5, the other far outside the window
        let n = 100;
        let mut v = vec![0.0; n];
        v[49] = 10.0;
        v[0] = 9.0;
        let bk = BoundaryKernel::biweight(0.25).unwrap();
        let est = ScedasisEstimator::new(&series(&v), 2, &bk).unwrap();
        assert!((est.tilde(0.5).unwrap() - 0.9375 / (2.0 * 0.25)).abs() < 1e-12);
        assert_eq!(est.tilde(0.9).unwrap(), 0.0);
    }

    #[test]
    fn floor_index_agrees_with_division() {
        for n in 1..300 {
            for i in 0..=n {
                assert_eq!(floor_index(n, i as f64 / n as f64), i);
            }
        }
        assert_eq!(floor_index(10, 0.35), 3);
        assert_eq!(floor_index(10, 2.0), 10);
    }

    #[test]
    fn sup_matches_fine_grid_when_every_point_but_one_exceeds() {
        let n = 50;
        let values: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let p = integrated_scedasis(&Series::new(values).unwrap(), n - 1).unwrap();
        let grid = 1_000_000;
        let rk = ((n - 1) as f64).sqrt();
        let mut best = 0.0f64;
        for j in 0..=grid {
            let s = j as f64 / grid as f64;
            // Exceedances are indices 2..=n; left limits matter at the jumps.
            let upto = n * j / grid;
            let below = if (n * j) % grid == 0 && j > 0 { upto - 1 } else { upto };
            for count in [upto.saturating_sub(1), below.saturating_sub(1)] {
                best = best.max((rk * (count as f64 / (n - 1) as f64 - s)).abs());
            }
        }
        assert!((cn_process_sup(&p) - best).abs() < 1e-9);
    }

    #[test]
    fn truncation_floor() {
        let n = 200;
        let v: Vec<f64> = (0..n).map(|i| if i < 20 { 100.0 + i as f64 } else { i as f64 * 0.01 }).collect();
        let bk = BoundaryKernel::biweight(0.1).unwrap();
        let cfg = ScedasisConfig::new(20, 0.1, 0.1);
        let curve = scedasis_estimate(&series(&v), &cfg, &bk).unwrap();
        for (t, c) in curve.tilde.iter().zip(&curve.hat) {
            assert!(*c >= 0.1);
            if *t >= 0.1 {
                assert_eq!(t, c);
            }
        }
        assert!(curve.tilde[curve.tilde.len() - 1] == 0.0);
    }

    #[test]
    fn config_validation() {
        let bk = BoundaryKernel::biweight(0.2).unwrap();
        let s = series(&[1.0, 2.0, 3.0, 4.0]);
        assert!(scedasis_estimate(&s, &ScedasisConfig::new(2, 0.2, 0.1).with_grid(vec![]), &bk).is_err());
        assert!(scedasis_estimate(&s, &ScedasisConfig::new(2, 0.3, 0.1), &bk).is_err());
        assert!(scedasis_estimate(&s, &ScedasisConfig::new(2, 0.2, 0.1).with_grid(vec![0.5, 0.2]), &bk).is_err());
        assert_eq!(default_grid().len(), 514);
    }
}
