//! High-quantile estimators: Weissman extrapolation at a fixed `k` and its
//! adaptive plug-in.

use crate::adaptive::TailSelection;
use crate::error::{Error, Result};
use crate::estimators::Sample;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::argument(format!("probability level must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// `X_{n,[n(1−p)]}` below the branch point `p = 1 − k/n`, otherwise
/// `X_{n,k} (k / (n(1−p)))^θ`.
pub(crate) fn extrapolate(sample: &Sample, k: usize, theta: f64, p: f64) -> f64 {
    let n = sample.len();
    let nt = n as f64 * (1.0 - p);
    // absorbs the rounding in 1 − (1 − k/n)
    let eps = 1e-9 * nt.max(1.0);
    let kf = k as f64;
    let xs = sample.sorted_desc();
    if kf < nt - eps {
        let idx = ((nt + eps).floor() as usize).clamp(1, n);
        xs[idx - 1]
    } else if kf <= nt + eps {
        xs[k - 1]
    } else {
        xs[k - 1] * (kf / nt).powf(theta)
    }
}

/// Weissman estimate `q̂_{n,k,p}` for `2 ≤ k ≤ n`; at `k = n` the exponent is `ĥ_{n,n−1}`.
pub fn quantile_fixed_k(sample: &Sample, k: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    let n = sample.len();
    if k < 2 || k > n {
        return Err(Error::argument(format!("quantile needs 2 ≤ k ≤ n = {n}, got k = {k}")));
    }
    Ok(extrapolate(sample, k, sample.hill_raw(k.min(n - 1)), p))
}

/// Adaptive estimate `q̂_{n,p}` using `k̂` and `θ̂` from `selection`.
pub fn quantile_adaptive(sample: &Sample, selection: &TailSelection, p: f64) -> Result<f64> {
    check_p(p)?;
    if selection.n != sample.len() || selection.k_hat == 0 || selection.k_hat > sample.len() {
        return Err(Error::argument(format!(
            "selection for n = {} (k̂ = {}) does not match a sample of size {}",
            selection.n,
            selection.k_hat,
            sample.len()
        )));
    }
    Ok(extrapolate(sample, selection.k_hat, selection.theta_hat.get(), p))
}
