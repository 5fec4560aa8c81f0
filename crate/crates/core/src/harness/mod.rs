//! Monte Carlo experiments and data analysis driver.
//!
//! Experiments are described by an [`ExperimentSpec`] (a TOML file), produce a
//! long-format [`ResultTable`], and are a pure function of the spec: every
//! replicate draws from its own seeded stream, and results are aggregated in
//! replicate order, so the thread count only changes the running time.

mod analyze;
mod experiments;

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scedasis::DEFAULT_KAPPA;
use crate::simulate::{BaseProcess, FamilyKind};
use crate::testing::Multiplier;

pub use analyze::{analyze_csv, read_column, AnalysisReport, AnalyzeConfig, Column, ColumnData};
pub use experiments::{run_ei_experiment, run_rejection_experiment};

pub const SCHEMA_VERSION: u32 = 1;

/// Share of failed replicates above which a cell is flagged.
pub const FAILURE_FLAG_SHARE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BootCvm,
    BootKs,
    SnCvm,
    SnKs,
    Edhz,
    /// `θ̂ = τ̂ / T̂`.
    Theta,
    /// `θ̂_2`.
    Theta2,
}

impl Method {
    pub const TESTS: [Method; 5] = [
        Method::BootCvm,
        Method::BootKs,
        Method::SnCvm,
        Method::SnKs,
        Method::Edhz,
    ];

    pub const ESTIMATORS: [Method; 2] = [Method::Theta, Method::Theta2];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::BootCvm => "boot-cvm",
            Method::BootKs => "boot-ks",
            Method::SnCvm => "sn-cvm",
            Method::SnKs => "sn-ks",
            Method::Edhz => "edhz",
            Method::Theta => "theta",
            Method::Theta2 => "theta2",
        }
    }

    pub fn is_test(self) -> bool {
        !matches!(self, Method::Theta | Method::Theta2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::TESTS
            .iter()
            .chain(Method::ESTIMATORS.iter())
            .find(|m| m.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub models: Vec<BaseProcess>,
    pub families: Vec<FamilyKind>,
    pub betas: Vec<f64>,
    pub n: usize,
    pub k: Vec<usize>,
    /// Bootstrap block lengths.
    pub r: Vec<usize>,
    /// Extremal-index block sizes.
    pub q: Vec<usize>,
    /// Bootstrap replicates `B`.
    pub bootstrap_replicates: usize,
    pub alpha: f64,
    /// Monte Carlo replicates `N`.
    pub replicates: usize,
    pub seed: u64,
    pub h: f64,
    pub kappa: f64,
    pub multiplier: Multiplier,
    pub methods: Vec<Method>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec::table1()
    }
}

impl ExperimentSpec {
    /// Desk-scale version of the rejection-rate study: `N = 200`, `B = 200`.
    pub fn table1() -> Self {
        ExperimentSpec {
            models: vec![
                BaseProcess::independent(),
                BaseProcess::armax(0.25),
                BaseProcess::arch(0.7),
            ],
            families: FamilyKind::ALL.to_vec(),
            betas: vec![1.0, 0.75, 0.5, 0.25],
            n: 2000,
            k: vec![100, 200],
            r: vec![4, 8],
            q: vec![8, 16, 32, 64, 128, 256],
            bootstrap_replicates: 200,
            alpha: 0.05,
            replicates: 200,
            seed: 20_230_501,
            h: 0.2,
            kappa: DEFAULT_KAPPA,
            multiplier: Multiplier::Rademacher,
            methods: Method::TESTS.to_vec(),
            out_dir: None,
        }
    }

    /// Desk-scale version of the extremal-index MSE study (ARCH, `c_2`).
    pub fn mse() -> Self {
        ExperimentSpec {
            models: vec![BaseProcess::arch(0.7)],
            families: vec![FamilyKind::C2],
            k: vec![300, 400],
            methods: Method::ESTIMATORS.to_vec(),
            ..ExperimentSpec::table1()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate_common(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.replicates < 1 {
            return fail("replicates (N) must be at least 1".into());
        }
        if self.models.is_empty() || self.families.is_empty() || self.betas.is_empty() {
            return fail("models, families and betas must be non-empty".into());
        }
        if self.k.is_empty() {
            return fail("k list is empty".into());
        }
        if let Some(&k) = self.k.iter().find(|&&k| k == 0 || k >= self.n) {
            return fail(format!("k = {k} must satisfy 1 <= k < n = {}", self.n));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
            return fail(format!("beta = {b} must lie in (0, 1]"));
        }
        Ok(())
    }

    pub(crate) fn validate_rejection(&self) -> Result<()> {
        self.validate_common()?;
        if !self.methods.iter().any(|m| m.is_test()) {
            return Err(Error::Config("no test method selected".into()));
        }
        if self.r.is_empty() {
            return Err(Error::Config("r list is empty".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub(crate) fn validate_ei(&self) -> Result<()> {
        self.validate_common()?;
        if self.q.is_empty() {
            return Err(Error::Config("q list is empty".into()));
        }
        if !self.methods.iter().any(|m| !m.is_test()) {
            return Err(Error::Config("no extremal-index estimator selected".into()));
        }
        if let Some(m) = self.models.iter().find(|m| m.theta().is_none()) {
            return Err(Error::Config(format!("true extremal index of {m} is unknown")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Rejection frequency.
    Rate,
    /// Mean squared error against the true extremal index.
    Mse,
}

/// One `(cell, method)` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub model: String,
    pub family: FamilyKind,
    pub beta: f64,
    pub n: usize,
    pub k: usize,
    /// `r` for the bootstrap and self-normalised tests, `q` for estimators, empty for EdHZ.
    pub block: Option<usize>,
    pub method: Method,
    pub metric: Metric,
    pub value: f64,
    /// Mean estimate (estimators only).
    pub mean_estimate: Option<f64>,
    pub theta_true: Option<f64>,
    /// Replicates that completed.
    pub replicates: usize,
    pub failures: usize,
    pub flagged: bool,
    pub bootstrap_replicates: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub records: Vec<ResultRecord>,
}

impl ResultTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for rec in &self.records {
            out.serialize(rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let records = csv::Reader::from_reader(r)
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRecord>, _>>()?;
        if let Some(rec) = records.iter().find(|r| r.schema_version != SCHEMA_VERSION) {
            return Err(Error::Data(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                rec.schema_version
            )));
        }
        Ok(ResultTable { records })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
    }

    /// First record matching the cell and method.
    pub fn find(
        &self,
        model: &str,
        family: FamilyKind,
        beta: f64,
        k: usize,
        block: Option<usize>,
        method: Method,
    ) -> Option<&ResultRecord> {
        self.records.iter().find(|r| {
            r.model == model
                && r.family == family
                && r.beta == beta
                && r.k == k
                && r.block == block
                && r.method == method
        })
    }
}

/// Writes `results.csv` and the effective `spec.toml` into `dir`.
pub fn write_outputs(dir: &Path, spec: &ExperimentSpec, table: &ResultTable) -> Result<()> {
    fs::create_dir_all(dir)?;
    table.write_csv(fs::File::create(dir.join("results.csv"))?)?;
    fs::write(dir.join("spec.toml"), spec.to_toml()?)?;
    Ok(())
}
