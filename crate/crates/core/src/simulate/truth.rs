//! Simulation truth: the stationary reference law `F`, its tail quantile
//! function `V(t) = F^{-1}(1 - 1/t)`, and the scedasis function in force.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::simulate::family::ScedasisFamily;

/// One row of a quantile table file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub level: f64,
    pub value: f64,
    pub n_sim: u64,
    pub seed: u64,
}

/// Empirical quantiles of a continuous law, with power-law tails beyond the
/// extreme tabulated levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    levels: Vec<f64>,
    values: Vec<f64>,
    n_sim: u64,
    seed: u64,
    upper_index: f64,
    lower_index: f64,
}

impl QuantileTable {
    pub fn from_rows(rows: &[QuantileRow]) -> Result<Self> {
        if rows.len() < 4 {
            return Err(Error::Data("quantile table needs at least 4 rows".into()));
        }
        let levels: Vec<f64> = rows.iter().map(|r| r.level).collect();
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        if levels.windows(2).any(|w| w[0] >= w[1]) || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Data("quantile table must be increasing".into()));
        }
        if levels[0] <= 0.0 || levels[levels.len() - 1] >= 1.0 {
            return Err(Error::Data("quantile levels must lie in (0, 1)".into()));
        }
        let mut table = QuantileTable {
            levels,
            values,
            n_sim: rows[0].n_sim,
            seed: rows[0].seed,
            upper_index: f64::INFINITY,
            lower_index: f64::INFINITY,
        };
        table.fit_tails();
        Ok(table)
    }

    /// Tabulates `sample` (which is sorted in place) at `levels`.
    pub fn from_sample(sample: &mut [f64], levels: &[f64], seed: u64) -> Result<Self> {
        if sample.len() < 2 {
            return Err(Error::param("sample too small"));
        }
        sample.sort_unstable_by(f64::total_cmp);
        let n = sample.len();
        let rows: Vec<QuantileRow> = levels
            .iter()
            .map(|&u| {
                let pos = u * (n - 1) as f64;
                let i = pos.floor() as usize;
                let frac = pos - i as f64;
                let hi = sample[(i + 1).min(n - 1)];
                QuantileRow {
                    level: u,
                    value: sample[i] + frac * (hi - sample[i]),
                    n_sim: n as u64,
                    seed,
                }
            })
            .collect();
        Self::from_rows(&rows)
    }

    // Pareto-type tail indices from the two outermost rows on each side;
    // only meaningful when the extreme values have the sign of their tail.
    fn fit_tails(&mut self) {
        let m = self.levels.len();
        let (u1, u2) = (self.levels[m - 2], self.levels[m - 1]);
        let (x1, x2) = (self.values[m - 2], self.values[m - 1]);
        if x1 > 0.0 && x2 > x1 {
            self.upper_index = ((1.0 - u1) / (1.0 - u2)).ln() / (x2 / x1).ln();
        }
        let (l1, l2) = (self.levels[1], self.levels[0]);
        let (y1, y2) = (self.values[1], self.values[0]);
        if y1 < 0.0 && y2 < y1 {
            self.lower_index = (l1 / l2).ln() / (y2 / y1).ln();
        }
    }

    pub fn rows(&self) -> Vec<QuantileRow> {
        self.levels
            .iter()
            .zip(&self.values)
            .map(|(&level, &value)| QuantileRow {
                level,
                value,
                n_sim: self.n_sim,
                seed: self.seed,
            })
            .collect()
    }

    pub fn n_sim(&self) -> u64 {
        self.n_sim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let m = self.levels.len();
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        if u > self.levels[m - 1] {
            let (ut, xt) = (self.levels[m - 1], self.values[m - 1]);
            return xt * ((1.0 - ut) / (1.0 - u)).powf(1.0 / self.upper_index);
        }
        if u < self.levels[0] {
            let (ul, xl) = (self.levels[0], self.values[0]);
            return xl * (ul / u).powf(1.0 / self.lower_index);
        }
        let j = self.levels.partition_point(|&l| l <= u).clamp(1, m - 1);
        let (u0, u1) = (self.levels[j - 1], self.levels[j]);
        let (x0, x1) = (self.values[j - 1], self.values[j]);
        x0 + (u - u0) / (u1 - u0) * (x1 - x0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let m = self.values.len();
        if x >= self.values[m - 1] {
            let (ut, xt) = (self.levels[m - 1], self.values[m - 1]);
            if x == xt {
                return ut;
            }
            return 1.0 - (1.0 - ut) * (x / xt).powf(-self.upper_index);
        }
        if x < self.values[0] {
            let (ul, xl) = (self.levels[0], self.values[0]);
            return ul * (x / xl).powf(-self.lower_index);
        }
        let j = self.values.partition_point(|&v| v <= x).clamp(1, m - 1);
        let (x0, x1) = (self.values[j - 1], self.values[j]);
        let (u0, u1) = (self.levels[j - 1], self.levels[j]);
        if x1 == x0 {
            return u1;
        }
        u0 + (x - x0) / (x1 - x0) * (u1 - u0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.rows() {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<QuantileRow>, _>>()?;
        Self::from_rows(&rows)
    }
}

/// Default tabulation levels: steps of 0.001 plus finer steps in both tails.
pub fn default_levels() -> Vec<f64> {
    let mut levels: Vec<f64> = Vec::new();
    for i in 1..10 {
        levels.push(i as f64 * 1e-5);
    }
    for i in 1..10 {
        levels.push(i as f64 * 1e-4);
    }
    for i in 1..1000 {
        levels.push(i as f64 * 1e-3);
    }
    for i in 1..10 {
        levels.push(0.999 + i as f64 * 1e-4);
    }
    for i in 1..10 {
        levels.push(0.9999 + i as f64 * 1e-5);
    }
    levels
}

pub type DistFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The common stationary law `F` of the base process.
#[derive(Clone)]
pub enum ReferenceLaw {
    /// Standard Fréchet(1), `F(x) = exp(-1/x)` on `(0, ∞)`.
    Frechet,
    Tabulated(Arc<QuantileTable>),
    /// User-supplied law; a missing quantile function makes it non-invertible.
    Custom {
        cdf: DistFn,
        quantile: Option<DistFn>,
    },
}

impl fmt::Debug for ReferenceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceLaw::Frechet => f.write_str("Frechet"),
            ReferenceLaw::Tabulated(t) => write!(f, "Tabulated(n_sim={}, seed={})", t.n_sim, t.seed),
            ReferenceLaw::Custom { quantile, .. } => {
                write!(f, "Custom(invertible={})", quantile.is_some())
            }
        }
    }
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ReferenceLaw::Frechet => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-1.0 / x).exp()
                }
            }
            ReferenceLaw::Tabulated(t) => t.cdf(x),
            ReferenceLaw::Custom { cdf, .. } => cdf(x),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            ReferenceLaw::Frechet => Ok(if u <= 0.0 {
                0.0
            } else if u >= 1.0 {
                f64::INFINITY
            } else {
                -1.0 / u.ln()
            }),
            ReferenceLaw::Tabulated(t) => Ok(t.quantile(u)),
            ReferenceLaw::Custom { quantile, .. } => quantile
                .as_ref()
                .map(|q| q(u))
                .ok_or_else(|| Error::param("reference law has no quantile function")),
        }
    }

    /// `V(t) = F^{-1}(1 - 1/t)`.
    pub fn tail_quantile(&self, t: f64) -> Result<f64> {
        self.quantile(1.0 - 1.0 / t)
    }
}

/// The scedasis function actually realised by a scale model: `c^power / ∫ c^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveScedasis {
    pub family: ScedasisFamily,
    pub power: f64,
    norm: f64,
}

impl EffectiveScedasis {
    pub fn new(family: ScedasisFamily, power: f64) -> Self {
        let norm = if power == 1.0 {
            1.0
        } else {
            integrate(|u| family.value(u).powf(power), 0.0, 0.5, 1e-13)
                + integrate(|u| family.value(u).powf(power), 0.5, 1.0, 1e-13)
        };
        EffectiveScedasis {
            family,
            power,
            norm,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        if self.power == 1.0 {
            self.family.value(s)
        } else {
            self.family.value(s).powf(self.power) / self.norm
        }
    }

    pub fn integral(&self, s: f64) -> f64 {
        if self.power == 1.0 {
            return self.family.integral(s);
        }
        let s = s.clamp(0.0, 1.0);
        let f = |u: f64| self.family.value(u).powf(self.power);
        let raw = integrate(f, 0.0, s.min(0.5), 1e-13) + integrate(f, 0.5, s.max(0.5), 1e-13);
        raw / self.norm
    }
}

/// Everything known about a simulated data-generating process.
#[derive(Debug, Clone)]
pub struct TruthModel {
    pub reference: ReferenceLaw,
    pub scedasis: EffectiveScedasis,
    /// Extremal index of the base process, where known.
    pub theta: Option<f64>,
}

impl TruthModel {
    pub fn c(&self, s: f64) -> f64 {
        self.scedasis.value(s)
    }

    pub fn integrated(&self, s: f64) -> f64 {
        self.scedasis.integral(s)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.reference.cdf(x)
    }

    pub fn tail_quantile(&self, t: f64) -> Result<f64> {
        self.reference.tail_quantile(t)
    }
}
