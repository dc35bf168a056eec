//! Lack-of-fit statistics comparing a single Pareto tail over `t` with a
//! two-segment (change-point) Pareto tail with break at `τ`.

use serde::{Deserialize, Serialize};

use crate::divergences::kl_raw;
use crate::error::{Error, Result};
use crate::estimators::{band_raw, Sample};

/// Band and tail components of `T_n(t, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatPair {
    /// `n̂_{t,τ} K(θ̂_{n,t,τ}, θ̂_{n,t})`
    pub t1: f64,
    /// `n̂_τ K(θ̂_{n,τ}, θ̂_{n,t})`
    pub t2: f64,
    pub total: f64,
}

impl TestStatPair {
    const ZERO: TestStatPair = TestStatPair { t1: 0.0, t2: 0.0, total: 0.0 };
}

/// `T_{n,m}` and the window it was maximised over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub m: usize,
    pub k_lo: usize,
    pub k_hi: usize,
    /// Smallest `k` maximising the tail component `T⁽²⁾_{n,m,k}`.
    pub best_k: usize,
    pub t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_k: Option<Vec<(usize, TestStatPair)>>,
}

#[inline]
fn scaled_kl(count: usize, estimate: f64, reference: f64) -> f64 {
    // an empty count drops the term even when K = ∞
    if count == 0 {
        0.0
    } else {
        count as f64 * kl_raw(estimate, reference)
    }
}

/// Statistic from the counts above `t` and `τ`.
#[inline]
fn pair_from_counts(sample: &Sample, n_t: usize, ln_t: f64, n_tau: usize, ln_tau: f64) -> TestStatPair {
    if n_t == 0 {
        return TestStatPair::ZERO;
    }
    let theta_t = sample.theta_from_count(n_t, ln_t);
    let theta_tau = sample.theta_from_count(n_tau, ln_tau);
    let theta_band = band_raw(sample, n_t, ln_t, n_tau, ln_tau);
    let t1 = scaled_kl(n_t - n_tau, theta_band, theta_t);
    let t2 = scaled_kl(n_tau, theta_tau, theta_t);
    TestStatPair { t1, t2, total: t1 + t2 }
}

/// `T_n(t, τ) = T⁽¹⁾ + T⁽²⁾` for `0 < t < τ`.
pub fn t_pair(sample: &Sample, t: f64, tau: f64) -> Result<TestStatPair> {
    if !(t > 0.0) || !(tau > t) {
        return Err(Error::argument(format!("test statistic needs 0 < t < τ, got t = {t}, τ = {tau}")));
    }
    let n_t = sample.count_exceed(t);
    let n_tau = sample.count_exceed(tau);
    Ok(pair_from_counts(sample, n_t, t.ln(), n_tau, tau.ln()))
}

/// `T_{n,m,k}`: thresholds `t = X_{n,m}`, `τ = X_{n,k}` with `1 ≤ k ≤ m ≤ n`.
#[inline]
pub(crate) fn pair_at_order_stats(sample: &Sample, m: usize, k: usize) -> TestStatPair {
    pair_from_counts(
        sample,
        sample.count_above_order_stat(m),
        sample.ln_order_stat(m),
        sample.count_above_order_stat(k),
        sample.ln_order_stat(k),
    )
}

/// Checks `0 < ρ, δ ≤ 1/3`.
pub fn check_window_constants(rho: f64, delta: f64) -> Result<()> {
    let ok = |v: f64| v > 0.0 && v <= 1.0 / 3.0 + 1e-12;
    if !ok(rho) || !ok(delta) {
        return Err(Error::config(format!(
            "window constants must satisfy 0 < rho, delta ≤ 1/3, got rho = {rho}, delta = {delta}"
        )));
    }
    Ok(())
}

const ROUNDING_SLACK: f64 = 1e-9;

/// Integer window `⌈ρm⌉ ≤ k ≤ ⌊(1−δ)m⌋`.
pub fn window_bounds(m: usize, rho: f64, delta: f64) -> Result<(usize, usize)> {
    let k_lo = ((rho * m as f64 - ROUNDING_SLACK).ceil() as usize).max(1);
    let k_hi = ((1.0 - delta) * m as f64 + ROUNDING_SLACK).floor() as usize;
    if k_lo > k_hi {
        return Err(Error::config(format!(
            "empty test window for m = {m}, rho = {rho}, delta = {delta}: ⌈ρm⌉ = {k_lo} > ⌊(1−δ)m⌋ = {k_hi}"
        )));
    }
    Ok((k_lo, k_hi))
}

fn scan_window(sample: &Sample, m: usize, rho: f64, delta: f64, trace: bool) -> Result<WindowResult> {
    check_window_constants(rho, delta)?;
    if m == 0 || m > sample.len() {
        return Err(Error::argument(format!("window index m = {m} outside 1..={}", sample.len())));
    }
    let (k_lo, k_hi) = window_bounds(m, rho, delta)?;
    let mut per_k = trace.then(|| Vec::with_capacity(k_hi - k_lo + 1));
    let mut t_max = f64::NEG_INFINITY;
    let mut best_k = k_lo;
    let mut best_t2 = f64::NEG_INFINITY;
    for k in k_lo..=k_hi {
        let pair = pair_at_order_stats(sample, m, k);
        if pair.total > t_max {
            t_max = pair.total;
        }
        if pair.t2 > best_t2 {
            best_t2 = pair.t2;
            best_k = k;
        }
        if let Some(v) = per_k.as_mut() {
            v.push((k, pair));
        }
    }
    Ok(WindowResult { m, k_lo, k_hi, best_k, t_max, per_k })
}

/// `T_{n,m} = max_k T_{n,m,k}` over the integer window, with the `T⁽²⁾` argmax.
pub fn t_window(sample: &Sample, m: usize, rho: f64, delta: f64) -> Result<WindowResult> {
    scan_window(sample, m, rho, delta, false)
}

/// As [`t_window`], also recording every `(k, T_{n,m,k})`.
pub fn t_window_traced(sample: &Sample, m: usize, rho: f64, delta: f64) -> Result<WindowResult> {
    scan_window(sample, m, rho, delta, true)
}
