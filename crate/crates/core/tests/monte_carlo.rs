//! Monte Carlo checks of the simulation models, estimators and tests.

use hetextremes::empirical_process::{simple_step, step};
use hetextremes::extremal_index::true_pseudo_obs;
use hetextremes::harness::{
    analyze_csv, run_ei_experiment, run_rejection_experiment, AnalyzeConfig, Column, ExperimentSpec, Method,
    ResultTable,
};
use hetextremes::kernels::BoundaryKernel;
use hetextremes::scedasis::{exceedance_indicators, uniform_grid, ScedasisEstimator};
use hetextremes::simulate::{
    derive_seed, ks_distance_uniform, ArchParams, BaseProcess, FamilyKind, ScaleExponent, ScedasisFamily,
    ARCH_KAPPA_PRIME_07,
};
use hetextremes::tail::hill_tail_index;
use hetextremes::testing::{bootstrap_test, BootstrapConfig, Statistic};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[test]
fn step_and_simple_step_merge() {
    let fam = ScedasisFamily::new(FamilyKind::C1, 0.5).unwrap();
    let grid = uniform_grid(33);
    let medians: Vec<f64> = [500usize, 1000, 2000, 4000, 8000]
        .iter()
        .map(|&n| {
            let k = (3.0 * (n as f64).sqrt()).round() as usize;
            let sups = (0..50)
                .map(|seed| {
                    let sim = BaseProcess::independent().simulate_seeded(n, &fam, 500 + seed).unwrap();
                    let f = step(&sim.series().unwrap(), &sim.truth, k, &grid, &grid).unwrap();
                    let s = simple_step(&sim.u, &sim.truth, k, &grid, &grid).unwrap();
                    f.difference(&s).unwrap().sup_abs()
                })
                .collect();
            median(sups)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
}

#[test]
fn homoscedastic_curve_averages_to_one() {
    let kernel = BoundaryKernel::biweight(0.2).unwrap();
    let grid: Vec<f64> = uniform_grid(61).into_iter().filter(|s| (0.2..=0.8).contains(s)).collect();
    let mut total = 0.0;
    for seed in 0..50 {
        let sim = BaseProcess::independent()
            .simulate_seeded(2000, &ScedasisFamily::homoscedastic(), seed)
            .unwrap();
        let est = ScedasisEstimator::new(&sim.series().unwrap(), 200, &kernel).unwrap();
        total += grid.iter().map(|&s| est.tilde(s).unwrap()).sum::<f64>() / grid.len() as f64;
    }
    assert!((total / 50.0 - 1.0).abs() < 0.15, "{}", total / 50.0);
}

/// Average share of the top-`k` exceedances per time bin, divided by the bin width,
/// against the model's own scedasis; returns the largest error in standard errors.
fn frequency_mismatch(model: &BaseProcess, fam: &ScedasisFamily, n: usize, k: usize, bins: usize) -> f64 {
    let seeds = 200;
    let mut per_seed = vec![vec![0.0; bins]; seeds];
    let mut truth = None;
    for (seed, row) in per_seed.iter_mut().enumerate() {
        let sim = model.simulate_seeded(n, fam, 9000 + seed as u64).unwrap();
        for i in exceedance_indicators(&sim.series().unwrap(), k).unwrap().positions() {
            row[((i - 1) * bins) / n] += bins as f64 / k as f64;
        }
        truth.get_or_insert(sim.truth);
    }
    let truth = truth.unwrap();
    (0..bins)
        .map(|b| {
            let col: Vec<f64> = per_seed.iter().map(|r| r[b]).collect();
            let (m, sd) = mean_sd(&col);
            // Bin average of the scedasis, via its integral.
            let c = bins as f64 * (truth.integrated((b + 1) as f64 / bins as f64) - truth.integrated(b as f64 / bins as f64));
            (m - c).abs() / (sd / (seeds as f64).sqrt())
        })
        .fold(0.0, f64::max)
}

#[test]
fn exceedance_frequencies_track_the_scedasis() {
    let fam = ScedasisFamily::new(FamilyKind::C1, 0.25).unwrap();
    let armax = frequency_mismatch(&BaseProcess::armax(0.25), &fam, 5000, 100, 10);
    assert!(armax < 4.0, "ARMAX {armax}");

    // ARCH tails are close to Pareto only far out, hence k/n = 0.25% below.
    let matched = BaseProcess::Arch(ArchParams::new(0.7).with_exponent(ScaleExponent::TailMatched));
    let sim = matched.simulate_seeded(100, &fam, 1).unwrap();
    assert!((sim.truth.c(0.3) - fam.value(0.3)).abs() < 1e-12);
    let m = frequency_mismatch(&matched, &fam, 40000, 100, 10);
    assert!(m < 4.0, "tail-matched ARCH {m}");

    // Default exponent: frequencies follow c^2 / ∫c^2, not c.
    let default = BaseProcess::arch(0.7);
    let sim = default.simulate_seeded(100, &fam, 1).unwrap();
    // ∫(a + bs)^2 = a^2 + ab + b^2/3 with a = 0.25, b = 1.5.
    let norm = 0.0625 + 0.375 + 0.75;
    assert!((sim.truth.c(0.0) - 0.0625 / norm).abs() < 1e-9);
    let m = frequency_mismatch(&default, &fam, 40000, 100, 10);
    assert!(m < 4.0, "default ARCH {m}");
}

#[test]
fn arch_absolute_value_tail_is_twice_kappa() {
    let sim = BaseProcess::arch(0.7)
        .simulate_seeded(1_000_000, &ScedasisFamily::homoscedastic(), 19)
        .unwrap();
    let abs: Vec<f64> = sim.w.iter().map(|w| w.abs()).collect();
    let est = hill_tail_index(&abs, 10_000).unwrap();
    let target = 2.0 * ARCH_KAPPA_PRIME_07;
    assert!((est - target).abs() / target < 0.10, "{est}");
}

#[test]
fn independent_pseudo_obs_have_unit_mean() {
    let q = 64;
    let sim = BaseProcess::independent()
        .simulate_seeded(64 * 2000, &ScedasisFamily::homoscedastic(), 360)
        .unwrap();
    let z = true_pseudo_obs(&sim.series().unwrap(), &sim.truth, q).unwrap();
    let (m, sd) = mean_sd(&z);
    let se = sd / (z.len() as f64).sqrt();
    assert!((m - 1.0).abs() < 3.0 * se, "mean {m}, se {se}");
}

fn rate(table: &ResultTable, model: &str, family: FamilyKind, beta: f64, k: usize, block: Option<usize>, m: Method) -> f64 {
    table.find(model, family, beta, k, block, m).unwrap().value
}

#[test]
fn rejection_rates_levels_and_power() {
    let mut spec = ExperimentSpec::table1();
    spec.models = vec![BaseProcess::independent(), BaseProcess::armax(0.25)];
    spec.families = vec![FamilyKind::C1, FamilyKind::C2];
    spec.k = vec![200];
    spec.r = vec![4];
    spec.methods = vec![Method::BootCvm, Method::SnCvm, Method::Edhz];
    let table = run_rejection_experiment(&spec).unwrap();

    for rec in &table.records {
        assert!((0.0..=1.0).contains(&rec.value));
        assert_eq!(rec.replicates + rec.failures, spec.replicates);
    }
    let sn = rate(&table, "indep", FamilyKind::C1, 0.25, 200, Some(4), Method::SnCvm);
    assert!(sn >= 0.85, "self-normalised power {sn}");
    let boot = rate(&table, "indep", FamilyKind::C1, 0.25, 200, Some(4), Method::BootCvm);
    assert!(boot >= 0.95, "bootstrap power {boot}");
    let edhz = rate(&table, "indep", FamilyKind::C1, 1.0, 200, None, Method::Edhz);
    assert!((edhz - 0.041).abs() <= 0.03, "EdHZ level {edhz}");

    // Power grows as β falls; one inversion of at most 2 points is tolerated.
    for model in ["indep", "armax(0.25)"] {
        for family in [FamilyKind::C1, FamilyKind::C2] {
            for (method, block) in [(Method::BootCvm, Some(4)), (Method::SnCvm, Some(4)), (Method::Edhz, None)] {
                let rates: Vec<f64> = [1.0, 0.75, 0.5, 0.25]
                    .iter()
                    .map(|&b| rate(&table, model, family, b, 200, block, method))
                    .collect();
                let drops: Vec<f64> = rates.windows(2).map(|w| w[0] - w[1]).filter(|d| *d > 0.0).collect();
                assert!(drops.len() <= 1 && drops.iter().all(|d| *d <= 0.02 + 1e-12), "{model} {family:?} {method}: {rates:?}");
            }
        }
    }
}

#[test]
fn extremal_index_experiment() {
    let mut spec = ExperimentSpec::mse();
    spec.models = vec![BaseProcess::armax(0.25), BaseProcess::arch(0.7)];
    spec.families = vec![FamilyKind::C1, FamilyKind::C2];
    spec.betas = vec![1.0, 0.5];
    spec.k = vec![400];
    spec.replicates = 100;
    let table = run_ei_experiment(&spec).unwrap();

    // Homoscedastic truth: both estimators agree on average.
    for model in ["armax(0.25)", "arch(0.7)"] {
        let a = table.find(model, FamilyKind::C1, 1.0, 400, Some(32), Method::Theta).unwrap();
        let b = table.find(model, FamilyKind::C1, 1.0, 400, Some(32), Method::Theta2).unwrap();
        let gap = (a.mean_estimate.unwrap() - b.mean_estimate.unwrap()).abs();
        assert!(gap < 0.05, "{model}: {gap}");
    }

    let armax = table.find("armax(0.25)", FamilyKind::C2, 0.5, 400, Some(32), Method::Theta2).unwrap();
    assert!((armax.mean_estimate.unwrap() - 0.75).abs() <= 0.1, "{armax:?}");

    let arch: Vec<_> = table
        .records
        .iter()
        .filter(|r| r.model == "arch(0.7)" && r.family == FamilyKind::C2 && r.beta == 0.5 && r.method == Method::Theta2)
        .collect();
    assert!(arch.iter().all(|r| r.theta_true == Some(0.721)));
    let best = arch.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    assert!(matches!(best.block, Some(16 | 32 | 64)), "MSE minimised at q = {:?}", best.block);
}

#[test]
fn bootstrap_p_values_are_calibrated() {
    let dir = tempfile::tempdir().unwrap();
    // The multiplier variance is inflated by about 1 + (r-1)k/n in finite samples,
    // which makes the test conservative at k = 200; k = 100 keeps that small.
    let cfg = AnalyzeConfig { k: 100, r: 4, ..AnalyzeConfig::default() };
    let mut p = Vec::new();
    for seed in 0..100u64 {
        let sim = BaseProcess::independent()
            .simulate_seeded(2000, &ScedasisFamily::homoscedastic(), 7000 + seed)
            .unwrap();
        let path = dir.path().join("series.csv");
        sim.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let report = analyze_csv(&path, &Column::Name("X".into()), &AnalyzeConfig { seed, ..cfg.clone() }, None).unwrap();
        p.push(report.test(hetextremes::testing::TestKind::CvmBoot).unwrap().p_value.unwrap());
    }
    let d = ks_distance_uniform(&p);
    assert!(d < 0.15, "KS distance {d}");
}

#[test]
fn decisions_stabilise_in_b() {
    let fam = ScedasisFamily::new(FamilyKind::C1, 0.5).unwrap();
    let mut agree = 0;
    let mut rejected = 0;
    for rep in 0..200u64 {
        let series = BaseProcess::armax(0.25)
            .simulate_seeded(2000, &fam, derive_seed(31, rep))
            .unwrap()
            .series()
            .unwrap();
        let small = bootstrap_test(&series, 200, &BootstrapConfig::new(4, 300, 0.05, rep), Statistic::Cvm).unwrap();
        let large = bootstrap_test(&series, 200, &BootstrapConfig::new(4, 3000, 0.05, rep), Statistic::Cvm).unwrap();
        agree += usize::from(small.reject == large.reject);
        rejected += usize::from(large.reject);
    }
    assert!(rejected > 20 && rejected < 180, "uninformative design: {rejected} rejections");
    assert!(agree >= 190, "{agree} of 200 decisions agree");
}
