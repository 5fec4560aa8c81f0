use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hetextremes::extremal_index::{theta_estimators, EiConfig};
use hetextremes::harness::{
    analyze_csv, read_column, run_ei_experiment, run_rejection_experiment, write_outputs, AnalyzeConfig,
    Column, ExperimentSpec, ResultTable,
};
use hetextremes::kernels::BoundaryKernel;
use hetextremes::scedasis::{scedasis_estimate, uniform_grid, ScedasisConfig, Series};
use hetextremes::simulate::{BaseProcess, FamilyKind, ScaleExponent, ScedasisFamily};
use hetextremes::testing::{
    bootstrap_tests, edhz_test, selfnorm_tests, BootstrapConfig, Multiplier, SelfNormConfig,
    SelfNormQuantiles, DEFAULT_ALPHAS, DEFAULT_GRID, DEFAULT_PATHS, DEFAULT_SEED, EDHZ_QUANTILE_095,
};
use hetextremes::{Error, Result};

#[derive(Parser)]
#[command(name = "hetex", version, about = "Heteroscedastic extremes: scedasis, tests, extremal index")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML experiment spec; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (speed only; results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scale model and write index,X,W,U as CSV.
    Simulate(SimulateArgs),
    /// Kernel estimate of the scedasis function of a CSV column.
    Scedasis(DataArgs),
    /// Bootstrap, self-normalised and EdHZ tests of c = 1 on a CSV column.
    Test(DataArgs),
    /// Extremal-index estimates for a CSV column.
    Ei(DataArgs),
    /// Everything above, with plot-ready CSVs in --out.
    Analyze(DataArgs),
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    #[command(subcommand)]
    Quantiles(QuantilesCommand),
}

#[derive(Args)]
struct SimulateArgs {
    /// indep, armax or arch.
    #[arg(long, default_value = "indep")]
    model: String,
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
    /// Use c^(1/(2κ')) instead of c^(1/κ') in the ARCH model.
    #[arg(long)]
    tail_matched: bool,
    #[arg(long, default_value = "c1")]
    family: FamilyKind,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(short, long, default_value_t = 2000)]
    n: usize,
}

#[derive(Args)]
struct DataArgs {
    /// CSV input file.
    input: PathBuf,
    /// Column by one-based position or header name.
    #[arg(long, default_value = "1")]
    column: String,
    #[arg(short, long, default_value_t = 200)]
    k: usize,
    #[arg(short, long, default_value_t = 4)]
    r: usize,
    #[arg(short, long, default_value_t = 32)]
    q: usize,
    #[arg(long, default_value_t = 0.2)]
    h: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates B.
    #[arg(short = 'B', long = "bootstrap-replicates", default_value_t = 200)]
    b: usize,
    #[arg(long, default_value = "rademacher")]
    multiplier: Multiplier,
    /// Points of the scedasis evaluation grid.
    #[arg(long, default_value_t = 201)]
    grid_points: usize,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Rejection rates of the five tests over models, scedasis families and β.
    Table1(ExperimentArgs),
    /// MSE of both extremal-index estimators against the block size.
    Mse(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Monte Carlo replicates N.
    #[arg(short = 'N', long)]
    replicates: Option<usize>,
    /// Bootstrap replicates B.
    #[arg(short = 'B', long = "bootstrap-replicates")]
    b: Option<usize>,
    #[arg(short, long)]
    n: Option<usize>,
    /// Full scale: N = 1000, B = 300.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum QuantilesCommand {
    /// Brownian-bridge critical values of the self-normalised statistics.
    Selfnorm {
        #[arg(long, default_value_t = DEFAULT_PATHS)]
        paths: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_series(args: &DataArgs) -> Result<Series> {
    let column: Column = args.column.parse()?;
    Series::new(read_column(&args.input, &column)?.values)
}

fn experiment_spec(cli: &Cli, args: &ExperimentArgs, mse: bool) -> Result<ExperimentSpec> {
    let mut spec = match &cli.config {
        Some(path) => ExperimentSpec::from_file(path)?,
        None if mse => ExperimentSpec::mse(),
        None => ExperimentSpec::table1(),
    };
    if args.full {
        spec.replicates = 1000;
        spec.bootstrap_replicates = 300;
    }
    if let Some(v) = args.replicates {
        spec.replicates = v;
    }
    if let Some(v) = args.b {
        spec.bootstrap_replicates = v;
    }
    if let Some(v) = args.n {
        spec.n = v;
    }
    if let Some(v) = cli.seed {
        spec.seed = v;
    }
    if let Some(v) = &cli.out {
        spec.out_dir = Some(v.clone());
    }
    Ok(spec)
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(1);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate(a) => {
            let model = match a.model.as_str() {
                "indep" => BaseProcess::independent(),
                "armax" => BaseProcess::armax(a.lambda),
                "arch" => {
                    let mut p = hetextremes::simulate::ArchParams::new(a.lambda);
                    if a.tail_matched {
                        p.exponent = ScaleExponent::TailMatched;
                    }
                    BaseProcess::Arch(p)
                }
                other => return Err(Error::Config(format!("unknown model '{other}'"))),
            };
            let fam = ScedasisFamily::new(a.family, a.beta)?;
            let sim = model.simulate_seeded(a.n, &fam, seed)?;
            let mut buf = Vec::new();
            sim.write_csv(&mut buf)?;
            emit(out, "simulation.csv", &String::from_utf8_lossy(&buf))
        }
        Command::Scedasis(a) => {
            let series = load_series(a)?;
            let kernel = BoundaryKernel::biweight(a.h)?;
            let cfg = ScedasisConfig::new(a.k, a.h, a.kappa).with_grid(uniform_grid(a.grid_points.max(2)));
            let curve = scedasis_estimate(&series, &cfg, &kernel)?;
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            emit(out, "scedasis_curve.csv", &String::from_utf8_lossy(&buf))
        }
        Command::Test(a) => {
            let series = load_series(a)?;
            let mut boot = BootstrapConfig::new(a.r, a.b, a.alpha, seed);
            boot.multiplier = a.multiplier;
            let (bks, bcvm) = bootstrap_tests(&series, a.k, &boot)?;
            let mut sn = SelfNormConfig::new(a.r, a.alpha, hetextremes::simulate::derive_seed(seed, 1));
            sn.multiplier = a.multiplier;
            let (sks, scvm) = selfnorm_tests(&series, a.k, &sn, SelfNormQuantiles::builtin())?;
            let edhz = edhz_test(&series, a.k, EDHZ_QUANTILE_095)?;
            emit(out, "tests.json", &json(&[bks, bcvm, sks, scvm, edhz])?)
        }
        Command::Ei(a) => {
            let series = load_series(a)?;
            let kernel = BoundaryKernel::biweight(a.h)?;
            let est = theta_estimators(&series, &EiConfig::new(a.q, a.k, a.h, a.kappa), &kernel)?;
            emit(out, "extremal_index.json", &json(&est)?)
        }
        Command::Analyze(a) => {
            let column: Column = a.column.parse()?;
            let cfg = AnalyzeConfig {
                k: a.k,
                r: a.r,
                q: a.q,
                h: a.h,
                kappa: a.kappa,
                alpha: a.alpha,
                bootstrap_replicates: a.b,
                seed,
                multiplier: a.multiplier,
            };
            let report = analyze_csv(&a.input, &column, &cfg, out)?;
            if out.is_none() {
                emit(None, "", &json(&report)?)?;
            }
            Ok(())
        }
        Command::Experiment(e) => {
            let (args, mse) = match e {
                ExperimentCommand::Table1(a) => (a, false),
                ExperimentCommand::Mse(a) => (a, true),
            };
            let spec = experiment_spec(cli, args, mse)?;
            let table: ResultTable = if mse {
                run_ei_experiment(&spec)?
            } else {
                run_rejection_experiment(&spec)?
            };
            match &spec.out_dir {
                Some(dir) => write_outputs(dir, &spec, &table),
                None => emit(None, "", &table.to_csv_string()?),
            }
        }
        Command::Quantiles(QuantilesCommand::Selfnorm { paths, grid }) => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            let table = match out {
                Some(dir) => SelfNormQuantiles::load_or_compute(dir, &DEFAULT_ALPHAS, *paths, *grid, seed)?,
                None => hetextremes::testing::selfnorm_reference_quantiles(&DEFAULT_ALPHAS, *paths, *grid, seed)?,
            };
            if out.is_none() {
                table.write_csv(std::io::stdout().lock())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Error::Config(format!("cannot build thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetex: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
