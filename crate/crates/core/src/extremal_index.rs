//! Extremal-index estimation from block maxima under heteroscedastic extremes.
//!
//! Block `j` of length `q` yields `Ẑ_j = q (1 - F̂_n(max of block j))`. Its mean
//! estimates `∫ (θ c)^{-1}`, so dividing `τ̂ = ∫ 1/ĉ_n` by it gives `θ̂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BoundaryKernel;
use crate::scedasis::{check_k, uniform_grid, ScedasisCurve, ScedasisEstimator, Series};
use crate::simulate::TruthModel;

pub const DEFAULT_TAU_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiConfig {
    /// Block size `q`.
    pub q: usize,
    pub k: usize,
    pub h: f64,
    pub kappa: f64,
    /// Grid points for the trapezoid rule in `τ̂`.
    #[serde(default = "default_tau_grid")]
    pub grid_points: usize,
}

fn default_tau_grid() -> usize {
    DEFAULT_TAU_GRID
}

impl EiConfig {
    pub fn new(q: usize, k: usize, h: f64, kappa: f64) -> Self {
        EiConfig {
            q,
            k,
            h,
            kappa,
            grid_points: DEFAULT_TAU_GRID,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_blocks(n, self.q)?;
        check_k(self.k, n)?;
        if !(self.h > 0.0 && self.h < 0.5) {
            return Err(Error::param(format!("h must lie in (0, 1/2), got {}", self.h)));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::param(format!(
                "kappa must be positive for the extremal index, got {}",
                self.kappa
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::param("tau grid needs at least 2 points"));
        }
        Ok(())
    }
}

fn check_blocks(n: usize, q: usize) -> Result<usize> {
    if q < 2 || q >= n {
        return Err(Error::param(format!("block size must satisfy 2 <= q < n = {n}, got {q}")));
    }
    let blocks = n / q;
    if blocks < 2 {
        return Err(Error::param(format!("need at least 2 blocks, got {blocks}")));
    }
    Ok(blocks)
}

fn block_maxima(values: &[f64], q: usize) -> impl Iterator<Item = f64> + '_ {
    values
        .chunks_exact(q)
        .map(|b| b.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// `Ẑ_j = q (1 - F̂_n(M_j))` with the empirical c.d.f. `F̂_n(x) = #{X_i ≤ x}/n`;
/// the trailing partial block is dropped.
pub fn block_pseudo_obs(series: &Series, q: usize) -> Result<Vec<f64>> {
    let n = series.len();
    check_blocks(n, q)?;
    let mut sorted = series.values().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(block_maxima(series.values(), q)
        .map(|m| {
            let at_most = sorted.partition_point(|&v| v <= m);
            q as f64 * (n - at_most) as f64 / n as f64
        })
        .collect())
}

/// `Z_j = q (1 - F(M_j))` with the true reference law.
pub fn true_pseudo_obs(series: &Series, truth: &TruthModel, q: usize) -> Result<Vec<f64>> {
    check_blocks(series.len(), q)?;
    Ok(block_maxima(series.values(), q)
        .map(|m| q as f64 * (1.0 - truth.cdf(m)))
        .collect())
}

/// Trapezoid rule for `τ̂ = ∫_0^1 1/ĉ_n` over the curve's grid, which must be
/// uniform from 0 to 1.
pub fn tau_hat(curve: &ScedasisCurve) -> Result<f64> {
    if !(curve.kappa > 0.0) {
        return Err(Error::param(format!(
            "tau needs a positive truncation kappa, got {}",
            curve.kappa
        )));
    }
    let g = curve.grid.len();
    if g < 2 {
        return Err(Error::param("tau grid needs at least 2 points"));
    }
    let step = 1.0 / (g - 1) as f64;
    let uniform = curve
        .grid
        .iter()
        .enumerate()
        .all(|(i, &s)| (s - i as f64 * step).abs() < 1e-12);
    if !uniform {
        return Err(Error::param("tau needs a uniform grid on [0, 1]"));
    }
    let inv: Vec<f64> = curve.hat.iter().map(|c| 1.0 / c).collect();
    let inner: f64 = inv.windows(2).map(|w| w[0] + w[1]).sum();
    Ok(inner * step / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiEstimate {
    pub z: Vec<f64>,
    pub t_hat: f64,
    pub tau_hat: f64,
    /// `θ̂ = τ̂ / T̂`, clamped to `(0, 1]`.
    pub theta: f64,
    /// `θ̂_2 = [k'^{-1} Σ_j Ẑ_j ĉ_n(j/k')]^{-1}`, clamped to `(0, 1]`.
    pub theta2: f64,
    pub theta_raw: f64,
    pub theta2_raw: f64,
    pub theta_clamped: bool,
    pub theta2_clamped: bool,
    pub config: EiConfig,
}

impl EiEstimate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn clamp_unit(raw: f64) -> (f64, bool) {
    if raw > 1.0 {
        (1.0, true)
    } else {
        (raw, false)
    }
}

/// Both extremal-index estimators; the kernel bandwidth must equal `cfg.h`.
pub fn theta_estimators(series: &Series, cfg: &EiConfig, kernel: &BoundaryKernel) -> Result<EiEstimate> {
    let n = series.len();
    cfg.validate(n)?;
    if (kernel.bandwidth() - cfg.h).abs() > 1e-15 {
        return Err(Error::param(format!(
            "kernel bandwidth {} differs from configured h = {}",
            kernel.bandwidth(),
            cfg.h
        )));
    }
    let z = block_pseudo_obs(series, cfg.q)?;
    let blocks = z.len() as f64;
    let t_hat = z.iter().sum::<f64>() / blocks;
    if t_hat == 0.0 {
        return Err(Error::degenerate(
            "every block maximum equals the sample maximum; T̂ is zero",
        ));
    }
    let est = ScedasisEstimator::new(series, cfg.k, kernel)?;
    let tau = tau_hat(&est.curve(&uniform_grid(cfg.grid_points), cfg.kappa)?)?;
    let weighted = z
        .iter()
        .enumerate()
        .map(|(j, &zj)| Ok(zj * est.truncated((j + 1) as f64 / blocks, cfg.kappa)?))
        .sum::<Result<f64>>()?
        / blocks;
    let theta_raw = tau / t_hat;
    let theta2_raw = 1.0 / weighted;
    let (theta, theta_clamped) = clamp_unit(theta_raw);
    let (theta2, theta2_clamped) = clamp_unit(theta2_raw);
    Ok(EiEstimate {
        z,
        t_hat,
        tau_hat: tau,
        theta,
        theta2,
        theta_raw,
        theta2_raw,
        theta_clamped,
        theta2_clamped,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{rng_stream, simulate_armax, ScedasisFamily};
    use rand::seq::SliceRandom;

    fn curve(grid: Vec<f64>, hat: Vec<f64>, kappa: f64) -> ScedasisCurve {
        ScedasisCurve {
            tilde: hat.clone(),
            grid,
            hat,
            k: 1,
            h: 0.1,
            kappa,
            exceedance_count: 1,
        }
    }

    #[test]
    fn pseudo_obs_rank_oracle() {
        let mut ranks: Vec<f64> = (1..=20).map(f64::from).collect();
        ranks.shuffle(&mut rng_stream(4, 0));
        let values: Vec<f64> = ranks.iter().map(|r| r.ln() * 3.0).collect();
        let s = Series::new(values).unwrap();
        let q = 3;
        let z = block_pseudo_obs(&s, q).unwrap();
        assert_eq!(z.len(), 6);
        for (j, zj) in z.iter().enumerate() {
            let rank = ranks[j * q..(j + 1) * q].iter().cloned().fold(0.0, f64::max);
            assert!((zj - q as f64 * (20.0 - rank) / 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn global_maximum_and_constant_series() {
        let s = Series::new(vec![1.0, 5.0, 2.0, 3.0]).unwrap();
        assert_eq!(block_pseudo_obs(&s, 2).unwrap()[0], 0.0);
        let c = Series::new(vec![7.0; 12]).unwrap();
        assert!(block_pseudo_obs(&c, 3).unwrap().iter().all(|&z| z == 0.0));
        assert!(block_pseudo_obs(&c, 12).is_err());
        assert!(block_pseudo_obs(&c, 1).is_err());
    }

    #[test]
    fn true_pseudo_obs_within_range() {
        let out = simulate_armax(4000, 0.25, &ScedasisFamily::homoscedastic(), 2).unwrap();
        let z = true_pseudo_obs(&out.series().unwrap(), &out.truth, 16).unwrap();
        assert!(z.iter().all(|&v| (0.0..=16.0).contains(&v)));
        // F(max) = 1 - x/q gives Z = x
        let m = -1.0 / (1.0 - 0.5f64 / 2.0).ln();
        let s = Series::new(vec![0.1, m, 0.2, 0.3]).unwrap();
        let z = true_pseudo_obs(&s, &out.truth, 2).unwrap();
        assert!((z[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tau_of_constant_curves() {
        let g = uniform_grid(11);
        assert!((tau_hat(&curve(g.clone(), vec![1.0; 11], 0.1)).unwrap() - 1.0).abs() < 1e-14);
        assert!((tau_hat(&curve(g.clone(), vec![0.1; 11], 0.1)).unwrap() - 10.0).abs() < 1e-12);
        assert!(tau_hat(&curve(g, vec![1.0; 11], 0.0)).is_err());
        assert!(tau_hat(&curve(vec![0.0, 0.3, 1.0], vec![1.0; 3], 0.1)).is_err());
    }

    #[test]
    fn tau_matches_riemann_oracle() {
        let g = uniform_grid(9);
        let hat: Vec<f64> = g.iter().map(|&s| 0.2 + (3.0 * s).sin().abs()).collect();
        let c = curve(g.clone(), hat.clone(), 0.1);
        // the trapezoid rule integrates the piecewise-linear interpolant of 1/ĉ exactly
        let inv: Vec<f64> = hat.iter().map(|c| 1.0 / c).collect();
        let m = 1_000_000;
        let riemann: f64 = (0..m)
            .map(|i| {
                let s = (i as f64 + 0.5) / m as f64;
                let j = ((s * 8.0).floor() as usize).min(7);
                let w = s * 8.0 - j as f64;
                inv[j] * (1.0 - w) + inv[j + 1] * w
            })
            .sum::<f64>()
            / m as f64;
        assert!((tau_hat(&c).unwrap() - riemann).abs() < 1e-6);
    }

    #[test]
    fn ratio_identity() {
        assert_eq!(clamp_unit(1.0), (1.0, false));
        assert_eq!(clamp_unit(1.3), (1.0, true));
        assert_eq!(clamp_unit(0.4), (0.4, false));
    }

    #[test]
    fn estimates_are_valid_and_flagged() {
        let out = simulate_armax(2000, 0.25, &ScedasisFamily::homoscedastic(), 21).unwrap();
        let kernel = BoundaryKernel::biweight(0.2).unwrap();
        let cfg = EiConfig::new(32, 400, 0.2, 0.1);
        let est = theta_estimators(&out.series().unwrap(), &cfg, &kernel).unwrap();
        assert_eq!(est.z.len(), 62);
        assert!(est.theta > 0.0 && est.theta <= 1.0);
        assert!(est.theta2 > 0.0 && est.theta2 <= 1.0);
        assert_eq!(est.theta_clamped, est.theta_raw > 1.0);
        assert!((est.theta_raw - est.tau_hat / est.t_hat).abs() < 1e-12);
        let json = est.to_json().unwrap();
        let back: EiEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, est);
    }

    #[test]
    fn rejects_bad_config() {
        let s = Series::new((0..100).map(f64::from).collect()).unwrap();
        let kernel = BoundaryKernel::biweight(0.2).unwrap();
        assert!(theta_estimators(&s, &EiConfig::new(60, 10, 0.2, 0.1), &kernel).is_err());
        assert!(theta_estimators(&s, &EiConfig::new(10, 10, 0.2, 0.0), &kernel).is_err());
        assert!(theta_estimators(&s, &EiConfig::new(10, 10, 0.3, 0.1), &kernel).is_err());
    }

    #[test]
    fn zero_t_hat_is_an_error() {
        let s = Series::new(vec![3.0; 40]).unwrap();
        let kernel = BoundaryKernel::biweight(0.2).unwrap();
        let err = theta_estimators(&s, &EiConfig::new(4, 5, 0.2, 0.1), &kernel).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
