use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal_index::{theta_estimators, EiConfig, EiEstimate};
use crate::kernels::BoundaryKernel;
use crate::scedasis::{integrated_scedasis, scedasis_estimate, ScedasisConfig, Series};
use crate::testing::{
    bootstrap_tests, edhz_test, selfnorm_tests, BootstrapConfig, Multiplier, Reference, SelfNormConfig,
    SelfNormQuantiles, TestReport, EDHZ_QUANTILE_095,
};

/// A CSV column, by one-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Default for Column {
    fn default() -> Self {
        Column::Index(1)
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(Error::Config("column positions start at 1".into())),
            Ok(i) => Ok(Column::Index(i)),
            Err(_) => Ok(Column::Name(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnData {
    pub header: Option<String>,
    /// One-based position of the column.
    pub position: usize,
    pub values: Vec<f64>,
}

/// Reads one numeric column. A first row whose selected cell is not numeric is
/// taken as a header; any later missing or non-numeric cell is an error naming
/// its line and column.
pub fn read_column(path: &Path, column: &Column) -> Result<ColumnData> {
    let file = fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = reader.records();
    let first = match rows.next() {
        Some(r) => r.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
        None => return Err(Error::Data(format!("{} is empty", path.display()))),
    };
    let (position, header, first_data) = match column {
        Column::Name(name) => {
            let pos = first.iter().position(|h| h == name).ok_or_else(|| {
                Error::Config(format!("no column named '{name}' in the header of {}", path.display()))
            })?;
            (pos + 1, Some(name.clone()), None)
        }
        Column::Index(i) => {
            let cell = first.get(i - 1).unwrap_or("");
            if !cell.is_empty() && cell.parse::<f64>().is_err() {
                (*i, Some(cell.to_string()), None)
            } else {
                (*i, None, Some(first))
            }
        }
    };
    let parse = |record: &csv::StringRecord| -> Result<f64> {
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(position - 1).unwrap_or("");
        if cell.is_empty() {
            return Err(Error::Data(format!("line {line}, column {position}: missing value")));
        }
        cell.parse::<f64>().map_err(|_| {
            Error::Data(format!("line {line}, column {position}: cannot parse '{cell}' as a number"))
        })
    };
    let mut values = Vec::new();
    if let Some(rec) = first_data {
        values.push(parse(&rec)?);
    }
    for rec in rows {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        values.push(parse(&rec)?);
    }
    Ok(ColumnData {
        header,
        position,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub k: usize,
    pub r: usize,
    pub q: usize,
    pub h: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub multiplier: Multiplier,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            k: 200,
            r: 4,
            q: 32,
            h: 0.2,
            kappa: 0.1,
            alpha: 0.05,
            bootstrap_replicates: 200,
            seed: 1,
            multiplier: Multiplier::Rademacher,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub source: String,
    pub column: usize,
    pub header: Option<String>,
    pub n: usize,
    pub config: AnalyzeConfig,
    pub threshold: f64,
    pub exceedances: usize,
    pub tests: Vec<TestReport>,
    pub extremal_index: Option<EiEstimate>,
    /// Steps that were skipped because the data made them degenerate.
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn test(&self, name: crate::testing::TestKind) -> Option<&TestReport> {
        self.tests.iter().find(|t| t.statistic == name)
    }
}

fn soft<T>(res: Result<T>, what: &str, warnings: &mut Vec<String>) -> Result<Option<T>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(Error::Degenerate(msg)) => {
            warnings.push(format!("{what}: {msg}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Scedasis curve, all five tests and both extremal-index estimates for one CSV column.
///
/// With `out_dir`, writes `report.json`, `scedasis_curve.csv`, `cn_path.csv` and
/// `bootstrap_replicates.csv` there.
pub fn analyze_csv(
    path: &Path,
    column: &Column,
    cfg: &AnalyzeConfig,
    out_dir: Option<&Path>,
) -> Result<AnalysisReport> {
    let data = read_column(path, column)?;
    let series = Series::new(data.values)?;
    let kernel = BoundaryKernel::biweight(cfg.h)?;
    let curve = scedasis_estimate(&series, &ScedasisConfig::new(cfg.k, cfg.h, cfg.kappa), &kernel)?;
    let process = integrated_scedasis(&series, cfg.k)?;
    let mut warnings = Vec::new();
    let mut tests = Vec::new();

    let mut boot = BootstrapConfig::new(cfg.r, cfg.bootstrap_replicates, cfg.alpha, cfg.seed);
    boot.multiplier = cfg.multiplier;
    let boot_reports = bootstrap_tests(&series, cfg.k, &boot)?;
    let mut sn = SelfNormConfig::new(cfg.r, cfg.alpha, crate::simulate::derive_seed(cfg.seed, 1));
    sn.multiplier = cfg.multiplier;
    let sn_quantiles = SelfNormQuantiles::builtin();
    if let Some((ks, cvm)) = soft(selfnorm_tests(&series, cfg.k, &sn, sn_quantiles), "self-normalisation", &mut warnings)? {
        tests.extend([ks, cvm]);
    }
    tests.insert(0, boot_reports.1.clone());
    tests.insert(0, boot_reports.0.clone());
    tests.push(edhz_test(&series, cfg.k, EDHZ_QUANTILE_095)?);

    let ei_cfg = EiConfig::new(cfg.q, cfg.k, cfg.h, cfg.kappa);
    let extremal_index = soft(theta_estimators(&series, &ei_cfg, &kernel), "extremal index", &mut warnings)?;

    let report = AnalysisReport {
        source: path.display().to_string(),
        column: data.position,
        header: data.header,
        n: series.len(),
        config: cfg.clone(),
        threshold: process.threshold(),
        exceedances: process.exceedance_count(),
        tests,
        extremal_index,
        warnings,
    };

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
        curve.write_csv(fs::File::create(dir.join("scedasis_curve.csv"))?)?;
        let mut out = csv::Writer::from_path(dir.join("cn_path.csv"))?;
        out.write_record(["s", "left_limit", "value"])?;
        let path = process.cn_path();
        let mut left = 0.0;
        for (j, (&t, &level)) in path.knots().iter().zip(path.levels()).enumerate() {
            if j > 0 {
                left = path.levels()[j - 1] - path.slope() * t;
            }
            out.write_record([t.to_string(), left.to_string(), (level - path.slope() * t).to_string()])?;
        }
        let end = path.value(1.0);
        out.write_record(["1".to_string(), end.to_string(), end.to_string()])?;
        out.flush()?;
        let mut out = csv::Writer::from_path(dir.join("bootstrap_replicates.csv"))?;
        out.write_record(["replicate", "ks", "cvm"])?;
        if let (Reference::Bootstrap { replicates: ks, .. }, Reference::Bootstrap { replicates: cvm, .. }) =
            (&boot_reports.0.reference, &boot_reports.1.reference)
        {
            for (b, (s, t)) in ks.iter().zip(cvm).enumerate() {
                out.write_record([(b + 1).to_string(), s.to_string(), t.to_string()])?;
            }
        }
        out.flush()?;
    }
    Ok(report)
}
