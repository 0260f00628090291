//! Hill estimator for the tail index of positive heavy-tailed samples.

use crate::error::{Error, Result};

/// Standard Hill estimate over the top `k_order` order statistics:
/// alpha_hat = k / sum_{i<k} ln(x_(i) / x_(k)) with x_(0) >= x_(1) >= ...
///
/// Requires 0 < k_order < samples.len() and strictly positive samples; a
/// degenerate sample (all equal in the top block) makes the denominator zero
/// and is reported as an error rather than silently returning infinity.
pub fn hill_tail_index(samples: &[f64], k_order: usize) -> Result<f64> {
    if k_order == 0 || k_order >= samples.len() {
        return Err(Error::DegenerateSamples(format!(
            "k_order = {k_order} must lie in (0, {})",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateSamples(
            "Hill estimator needs strictly positive samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let xk = sorted[k_order];
    let sum_log: f64 = sorted[..k_order].iter().map(|x| (x / xk).ln()).sum();
    if sum_log <= 0.0 {
        return Err(Error::DegenerateSamples(
            "top order statistics are all equal; tail index undefined".into(),
        ));
    }
    Ok(k_order as f64 / sum_log)
}

/// Default order-statistic count used by the tail experiments: n/100 clamped
/// to [10, n-1].
pub fn default_k_order(n: usize) -> usize {
    (n / 100).clamp(10, n.saturating_sub(1).max(1))
}
