//! Sequential tail empirical processes built from simulation truth.
//!
//! The simple STEP counts exceedances of the uniformised series, the STEP counts
//! exceedances of the observations over `V(n/(kx))`. Both need the true law and
//! scedasis, so they are diagnostics for simulated data only.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scedasis::{check_k, floor_index, uniform_grid, Series};
use crate::simulate::TruthModel;

/// Default number of grid points in each direction.
pub const DEFAULT_GRID_POINTS: usize = 64;

/// Values `m[a][b]` at `(s_grid[a], x_grid[b])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMatrix {
    pub s_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GridMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Entrywise difference; the grids must agree.
    pub fn difference(&self, other: &GridMatrix) -> Result<GridMatrix> {
        if self.s_grid != other.s_grid || self.x_grid != other.x_grid {
            return Err(Error::param("grid matrices live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(GridMatrix {
            s_grid: self.s_grid.clone(),
            x_grid: self.x_grid.clone(),
            values,
        })
    }

    /// Rows are the `s` grid; the header lists the `x` grid.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["s".to_string()];
        header.extend(self.x_grid.iter().map(|x| format!("x={x}")));
        out.write_record(&header)?;
        for (s, row) in self.s_grid.iter().zip(&self.values) {
            let mut rec = vec![s.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `(s, x)` grids of 64 points each over `[0, 1]`.
pub fn default_grids() -> (Vec<f64>, Vec<f64>) {
    (uniform_grid(DEFAULT_GRID_POINTS), uniform_grid(DEFAULT_GRID_POINTS))
}

fn check_grids(grid_s: &[f64], grid_x: &[f64]) -> Result<()> {
    if grid_s.is_empty() || grid_x.is_empty() {
        return Err(Error::param("empty evaluation grid"));
    }
    if grid_s.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::param("s grid must lie within [0, 1]"));
    }
    if grid_x.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::param("x grid must be finite and non-negative"));
    }
    Ok(())
}

/// Evaluates `√k (k^{-1} Σ_{i≤⌊ns⌋} hit(i, x) - x C(s))` on the grid, one prefix sum per `x`.
fn assemble(
    n: usize,
    k: usize,
    truth: &TruthModel,
    grid_s: &[f64],
    grid_x: &[f64],
    hit: impl Fn(usize, usize) -> bool,
) -> GridMatrix {
    let rk = (k as f64).sqrt();
    let cs: Vec<f64> = grid_s.iter().map(|&s| truth.integrated(s)).collect();
    let floors: Vec<usize> = grid_s
        .iter()
        .map(|&s| floor_index(n, s))
        .collect();
    let mut values = vec![vec![0.0; grid_x.len()]; grid_s.len()];
    let mut prefix = vec![0usize; n + 1];
    for (b, &x) in grid_x.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for i in 0..n {
            prefix[i + 1] = prefix[i] + usize::from(hit(i, b));
        }
        for (a, &upto) in floors.iter().enumerate() {
            values[a][b] = rk * (prefix[upto] as f64 / k as f64 - x * cs[a]);
        }
    }
    GridMatrix {
        s_grid: grid_s.to_vec(),
        x_grid: grid_x.to_vec(),
        values,
    }
}

/// Simple STEP `𝕊_n(s, x)` from the uniformised series `U_i = F_{n,i}(X_i)`.
pub fn simple_step(
    u_series: &[f64],
    truth: &TruthModel,
    k: usize,
    grid_s: &[f64],
    grid_x: &[f64],
) -> Result<GridMatrix> {
    let n = u_series.len();
    check_k(k, n)?;
    check_grids(grid_s, grid_x)?;
    if let Some(i) = u_series.iter().position(|u| !(*u > 0.0 && *u < 1.0)) {
        return Err(Error::Data(format!(
            "U_{} = {} lies outside (0, 1)",
            i + 1,
            u_series[i]
        )));
    }
    let c: Vec<f64> = (1..=n).map(|i| truth.c(i as f64 / n as f64)).collect();
    let c_max = c.iter().cloned().fold(0.0, f64::max);
    let x_max = grid_x.iter().cloned().fold(0.0, f64::max);
    let frac = k as f64 / n as f64;
    if frac * c_max * x_max > 1.0 {
        return Err(Error::param(format!(
            "(k/n) c_max x = {} exceeds 1; reduce the x grid",
            frac * c_max * x_max
        )));
    }
    Ok(assemble(n, k, truth, grid_s, grid_x, |i, b| {
        u_series[i] > 1.0 - frac * c[i] * grid_x[b]
    }))
}

/// STEP `𝔽_n(s, x)` counting `X_i > V(n/(kx))`; the `x = 0` column is 0.
pub fn step(
    series: &Series,
    truth: &TruthModel,
    k: usize,
    grid_s: &[f64],
    grid_x: &[f64],
) -> Result<GridMatrix> {
    let n = series.len();
    check_k(k, n)?;
    check_grids(grid_s, grid_x)?;
    let thresholds = grid_x
        .iter()
        .map(|&x| {
            if x == 0.0 {
                Ok(f64::INFINITY)
            } else {
                truth.tail_quantile(n as f64 / (k as f64 * x))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let xs = series.values();
    Ok(assemble(n, k, truth, grid_s, grid_x, |i, b| xs[i] > thresholds[b]))
}
