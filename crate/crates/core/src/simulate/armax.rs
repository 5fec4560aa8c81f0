use rand::distributions::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::simulate::family::{ScedasisFamily, THRESHOLD_LEVEL};
use crate::simulate::rng::rng_stream;
use crate::simulate::truth::{EffectiveScedasis, ReferenceLaw, TruthModel};
use crate::simulate::SimOutput;

/// 80% quantile of Fréchet(1): `-1 / ln 0.8`.
pub const ARMAX_THRESHOLD: f64 = 4.481_420_117_724_551;

fn frechet<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -1.0 / u.ln()
}

pub(crate) fn armax_with<R: Rng>(
    rng: &mut R,
    n: usize,
    lambda: f64,
    family: &ScedasisFamily,
) -> Result<SimOutput> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::param(format!("ARMAX lambda must lie in [0, 1), got {lambda}")));
    }
    if n < 2 {
        return Err(Error::param("n must be at least 2"));
    }
    let threshold = -1.0 / THRESHOLD_LEVEL.ln();
    // the stationary law is Fréchet(1), so the start needs no burn-in
    let mut prev = frechet(rng);
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        let v = frechet(rng);
        prev = (lambda * prev).max((1.0 - lambda) * v);
        w.push(prev);
    }
    let x = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let s = (i + 1) as f64 / n as f64;
            family
                .scedasis_value(s, Some((wi, threshold)))
                .map(|factor| factor * wi)
        })
        .collect::<Result<Vec<_>>>()?;
    let u = w.iter().map(|&wi| (-1.0 / wi).exp()).collect();
    Ok(SimOutput {
        x,
        w,
        u,
        truth: TruthModel {
            reference: ReferenceLaw::Frechet,
            scedasis: EffectiveScedasis::new(*family, 1.0),
            theta: Some(1.0 - lambda),
        },
    })
}

/// ARMAX scale model `X_i = c(i/n) W_i` (or its threshold variant).
pub fn simulate_armax(n: usize, lambda: f64, family: &ScedasisFamily, seed: u64) -> Result<SimOutput> {
    armax_with(&mut rng_stream(seed, 0), n, lambda, family)
}
