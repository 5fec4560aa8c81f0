use rayon::prelude::*;

use crate::error::Result;
use crate::extremal_index::{theta_estimators, EiConfig};
use crate::harness::{ExperimentSpec, Method, Metric, ResultRecord, ResultTable, FAILURE_FLAG_SHARE, SCHEMA_VERSION};
use crate::kernels::BoundaryKernel;
use crate::simulate::{derive_seed, BaseProcess, ScedasisFamily, SimOutput};
use crate::testing::{
    bootstrap_tests, edhz_test, selfnorm_tests, BootstrapConfig, SelfNormConfig, SelfNormQuantiles,
    EDHZ_QUANTILE_095,
};

/// Stable 64-bit FNV-1a hash, used to key random streams by model label.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Data seed of replicate `rep` under `model`. Families and β share it, so all
/// cells of one model see common random numbers.
fn data_seed(master: u64, model: &BaseProcess, rep: usize) -> u64 {
    derive_seed(derive_seed(master, fnv1a(&model.to_string())), rep as u64)
}

fn simulate(model: &BaseProcess, spec: &ExperimentSpec, fam: &ScedasisFamily, seed: u64) -> Result<SimOutput> {
    model.simulate_seeded(spec.n, fam, seed)
}

/// One output column of a cell: `(k, block, method)`.
#[derive(Debug, Clone, Copy)]
struct Slot {
    k: usize,
    block: Option<usize>,
    method: Method,
}

fn rejection_slots(spec: &ExperimentSpec) -> Vec<Slot> {
    let mut slots = Vec::new();
    for &k in &spec.k {
        for &r in &spec.r {
            for m in [Method::BootCvm, Method::BootKs, Method::SnCvm, Method::SnKs] {
                if spec.methods.contains(&m) {
                    slots.push(Slot {
                        k,
                        block: Some(r),
                        method: m,
                    });
                }
            }
        }
        if spec.methods.contains(&Method::Edhz) {
            slots.push(Slot {
                k,
                block: None,
                method: Method::Edhz,
            });
        }
    }
    slots
}

fn ei_slots(spec: &ExperimentSpec) -> Vec<Slot> {
    let mut slots = Vec::new();
    for &k in &spec.k {
        for &q in &spec.q {
            for m in Method::ESTIMATORS {
                if spec.methods.contains(&m) {
                    slots.push(Slot {
                        k,
                        block: Some(q),
                        method: m,
                    });
                }
            }
        }
    }
    slots
}

fn tag(kind: u64, k: usize, block: usize) -> u64 {
    (kind << 48) ^ ((k as u64) << 20) ^ block as u64
}

/// Test decisions of one replicate, aligned with `slots`; `None` marks a failure.
fn rejection_replicate(
    spec: &ExperimentSpec,
    slots: &[Slot],
    model: &BaseProcess,
    fam: &ScedasisFamily,
    rep: usize,
    quantiles: &SelfNormQuantiles,
) -> Vec<Option<bool>> {
    let seed = data_seed(spec.seed, model, rep);
    let series = match simulate(model, spec, fam, seed).and_then(|o| o.series()) {
        Ok(s) => s,
        Err(_) => return vec![None; slots.len()],
    };
    let mut out = Vec::with_capacity(slots.len());
    let mut i = 0;
    while i < slots.len() {
        let Slot { k, block, method } = slots[i];
        match (method, block) {
            (Method::BootCvm | Method::BootKs, Some(r)) => {
                let mut cfg = BootstrapConfig::new(r, spec.bootstrap_replicates, spec.alpha, derive_seed(seed, tag(1, k, r)));
                cfg.multiplier = spec.multiplier;
                let res = bootstrap_tests(&series, k, &cfg);
                // both statistics come from the same replicates; consume adjacent slots together
                while i < slots.len() && slots[i].k == k && slots[i].block == block
                    && matches!(slots[i].method, Method::BootCvm | Method::BootKs)
                {
                    out.push(res.as_ref().ok().map(|(ks, cvm)| match slots[i].method {
                        Method::BootKs => ks.reject,
                        _ => cvm.reject,
                    }));
                    i += 1;
                }
            }
            (Method::SnCvm | Method::SnKs, Some(r)) => {
                let mut cfg = SelfNormConfig::new(r, spec.alpha, derive_seed(seed, tag(2, k, r)));
                cfg.multiplier = spec.multiplier;
                let res = selfnorm_tests(&series, k, &cfg, quantiles);
                while i < slots.len() && slots[i].k == k && slots[i].block == block
                    && matches!(slots[i].method, Method::SnCvm | Method::SnKs)
                {
                    out.push(res.as_ref().ok().map(|(ks, cvm)| match slots[i].method {
                        Method::SnKs => ks.reject,
                        _ => cvm.reject,
                    }));
                    i += 1;
                }
            }
            _ => {
                out.push(edhz_test(&series, k, EDHZ_QUANTILE_095).ok().map(|r| r.reject));
                i += 1;
            }
        }
    }
    out
}

fn record(
    spec: &ExperimentSpec,
    model: &BaseProcess,
    fam: &ScedasisFamily,
    slot: Slot,
    metric: Metric,
    value: f64,
    mean_estimate: Option<f64>,
    completed: usize,
) -> ResultRecord {
    let failures = spec.replicates - completed;
    let is_boot = matches!(slot.method, Method::BootCvm | Method::BootKs);
    ResultRecord {
        schema_version: SCHEMA_VERSION,
        model: model.to_string(),
        family: fam.kind(),
        beta: fam.beta(),
        n: spec.n,
        k: slot.k,
        block: slot.block,
        method: slot.method,
        metric,
        value,
        mean_estimate,
        theta_true: model.theta(),
        replicates: completed,
        failures,
        flagged: failures as f64 > FAILURE_FLAG_SHARE * spec.replicates as f64,
        bootstrap_replicates: is_boot.then_some(spec.bootstrap_replicates),
        alpha: slot.method.is_test().then_some(spec.alpha),
        seed: spec.seed,
    }
}

fn cells(spec: &ExperimentSpec) -> Result<Vec<(BaseProcess, ScedasisFamily)>> {
    let mut out = Vec::new();
    for model in &spec.models {
        for &kind in &spec.families {
            for &beta in &spec.betas {
                out.push((model.clone(), ScedasisFamily::new(kind, beta)?));
            }
        }
    }
    Ok(out)
}

/// Rejection frequencies of the selected tests for every model, family, β, `k` and `r`.
///
/// A replicate whose simulation or test errors is excluded from that method's
/// rate; cells where more than 1% of replicates failed are flagged.
pub fn run_rejection_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate_rejection()?;
    let slots = rejection_slots(spec);
    let quantiles = SelfNormQuantiles::builtin();
    let mut records = Vec::new();
    for (model, fam) in cells(spec)? {
        let outcomes: Vec<Vec<Option<bool>>> = (0..spec.replicates)
            .into_par_iter()
            .map(|rep| rejection_replicate(spec, &slots, &model, &fam, rep, quantiles))
            .collect();
        for (j, &slot) in slots.iter().enumerate() {
            let done: Vec<bool> = outcomes.iter().filter_map(|o| o[j]).collect();
            let rate = if done.is_empty() {
                f64::NAN
            } else {
                done.iter().filter(|&&d| d).count() as f64 / done.len() as f64
            };
            records.push(record(spec, &model, &fam, slot, Metric::Rate, rate, None, done.len()));
        }
    }
    Ok(ResultTable { records })
}

/// Mean squared error of `θ̂` and `θ̂_2` for every model, family, β, `k` and `q`.
pub fn run_ei_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate_ei()?;
    let slots = ei_slots(spec);
    let kernel = BoundaryKernel::biweight(spec.h)?;
    let mut records = Vec::new();
    for (model, fam) in cells(spec)? {
        let theta = model.theta().expect("validated");
        let outcomes: Vec<Vec<Option<f64>>> = (0..spec.replicates)
            .into_par_iter()
            .map(|rep| {
                let seed = data_seed(spec.seed, &model, rep);
                let series = match simulate(&model, spec, &fam, seed).and_then(|o| o.series()) {
                    Ok(s) => s,
                    Err(_) => return vec![None; slots.len()],
                };
                let mut out = Vec::with_capacity(slots.len());
                let mut last: Option<(usize, usize, Option<crate::extremal_index::EiEstimate>)> = None;
                for slot in &slots {
                    let q = slot.block.expect("estimator slots carry q");
                    if last.as_ref().map(|(k, q0, _)| (*k, *q0)) != Some((slot.k, q)) {
                        let cfg = EiConfig::new(q, slot.k, spec.h, spec.kappa);
                        last = Some((slot.k, q, theta_estimators(&series, &cfg, &kernel).ok()));
                    }
                    let est = last.as_ref().and_then(|(_, _, e)| e.as_ref());
                    out.push(est.map(|e| match slot.method {
                        Method::Theta => e.theta,
                        _ => e.theta2,
                    }));
                }
                out
            })
            .collect();
        for (j, &slot) in slots.iter().enumerate() {
            let done: Vec<f64> = outcomes.iter().filter_map(|o| o[j]).collect();
            let (mse, mean) = if done.is_empty() {
                (f64::NAN, None)
            } else {
                let len = done.len() as f64;
                (
                    done.iter().map(|e| (e - theta).powi(2)).sum::<f64>() / len,
                    Some(done.iter().sum::<f64>() / len),
                )
            };
            records.push(record(spec, &model, &fam, slot, Metric::Mse, mse, mean, done.len()));
        }
    }
    Ok(ResultTable { records })
}
