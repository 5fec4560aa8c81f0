//! Hill estimation of a regularly varying upper tail.

use crate::error::{Error, Result};

/// Hill estimate `γ̂ = k^{-1} Σ_{i<k} ln(X_{(n-i)} / X_{(n-k)})` of the extreme value index
/// from the top `k` order statistics. All of them and the threshold must be positive.
pub fn hill_index(values: &[f64], k: usize) -> Result<f64> {
    let n = values.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < n = {n}, got {k}")));
    }
    let mut v = values.to_vec();
    let (_, &mut threshold, upper) = v.select_nth_unstable_by(n - k - 1, |a, b| a.total_cmp(b));
    if !(threshold > 0.0) {
        return Err(Error::degenerate(format!(
            "Hill threshold must be positive, got {threshold}"
        )));
    }
    let lt = threshold.ln();
    Ok(upper.iter().map(|x| x.ln() - lt).sum::<f64>() / k as f64)
}

/// Tail index `1/γ̂`.
pub fn hill_tail_index(values: &[f64], k: usize) -> Result<f64> {
    let gamma = hill_index(values, k)?;
    if gamma <= 0.0 {
        return Err(Error::degenerate("top order statistics are all tied"));
    }
    Ok(1.0 / gamma)
}
