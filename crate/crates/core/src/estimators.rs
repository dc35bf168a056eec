//! Order statistics and the local Pareto estimators.
//!
//! A [`Sample`] caches the descending order statistics, their logarithms and
//! prefix sums of the logarithms, so every estimator below is O(1) once the
//! exceedance counts are known. Counts use strict inequality (`X > t`).

use std::cmp::Ordering;

use crate::divergences::{kl_raw, Divergence, ParetoIndex};
use crate::error::{Error, Result};

/// Immutable positive observations with cached descending order statistics.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Vec<f64>,
    order_desc: Vec<usize>,
    sorted: Vec<f64>,
    ln_sorted: Vec<f64>,
    // ln_prefix[j] = Σ_{i<j} ln X_{n,i+1}
    ln_prefix: Vec<f64>,
    // strictly_above[j] = #{i : X_i > X_{n,j+1}}
    strictly_above: Vec<usize>,
}

/// Exceedance counts `n̂_t` and `n̂_{t,τ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceedanceCounts {
    pub n_t: usize,
    pub n_t_tau: usize,
}

impl Sample {
    /// Builds a sample; every observation must be finite and strictly positive.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("sample must contain at least one observation"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!(
                "observation {} is {v}; all observations must be finite and strictly positive",
                i + 1
            )));
        }
        let mut order_desc: Vec<usize> = (0..values.len()).collect();
        // stable: ties keep original index order
        order_desc.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
        let sorted: Vec<f64> = order_desc.iter().map(|&i| values[i]).collect();
        let ln_sorted: Vec<f64> = sorted.iter().map(|v| v.ln()).collect();
        let mut ln_prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        ln_prefix.push(acc);
        for l in &ln_sorted {
            acc += l;
            ln_prefix.push(acc);
        }
        let mut strictly_above = vec![0; sorted.len()];
        for j in 1..sorted.len() {
            strictly_above[j] = if sorted[j] == sorted[j - 1] { strictly_above[j - 1] } else { j };
        }
        Ok(Sample { values, order_desc, sorted, ln_sorted, ln_prefix, strictly_above })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Permutation `π` with `values[π[0]] ≥ values[π[1]] ≥ …`.
    pub fn order_desc(&self) -> &[usize] {
        &self.order_desc
    }

    /// Descending order statistics `X_{n,1} ≥ … ≥ X_{n,n}`.
    pub fn sorted_desc(&self) -> &[f64] {
        &self.sorted
    }

    /// `X_{n,k}` with 1-based `k`.
    pub fn order_stat(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.len() {
            return Err(Error::argument(format!("order statistic index {k} outside 1..={}", self.len())));
        }
        Ok(self.sorted[k - 1])
    }

    pub fn max(&self) -> f64 {
        self.sorted[0]
    }

    /// `n̂_t`, the number of observations strictly greater than `t`.
    pub fn count_exceed(&self, t: f64) -> usize {
        self.sorted.partition_point(|&x| x > t)
    }

    /// Both counts for the band `(t, τ]`.
    pub fn counts(&self, t: f64, tau: f64) -> Result<ExceedanceCounts> {
        if tau < t {
            return Err(Error::argument(format!("band needs t ≤ τ, got t = {t}, τ = {tau}")));
        }
        let n_t = self.count_exceed(t);
        Ok(ExceedanceCounts { n_t, n_t_tau: n_t - self.count_exceed(tau) })
    }

    /// `n̂` at the threshold `X_{n,k}` (1-based), without a search.
    #[inline]
    pub(crate) fn count_above_order_stat(&self, k: usize) -> usize {
        self.strictly_above[k - 1]
    }

    #[inline]
    pub(crate) fn ln_order_stat(&self, k: usize) -> f64 {
        self.ln_sorted[k - 1]
    }

    /// `Σ_{i ≤ count} log X_{n,i} − count · log t`, the total log-excess of
    /// the top `count` observations over `t`.
    #[inline]
    pub(crate) fn log_excess_sum(&self, count: usize, ln_t: f64) -> f64 {
        self.ln_prefix[count] - count as f64 * ln_t
    }

    /// Hill estimator `ĥ_{n,k} = (1/k) Σ_{i≤k} log(X_{n,i} / X_{n,k+1})`, `1 ≤ k ≤ n − 1`.
    pub fn hill(&self, k: usize) -> Result<ParetoIndex> {
        if k == 0 || k >= self.len() {
            return Err(Error::argument(format!(
                "Hill estimator needs 1 ≤ k ≤ n − 1 = {}, got k = {k}",
                self.len().saturating_sub(1)
            )));
        }
        Ok(ParetoIndex::from_raw(self.hill_raw(k)))
    }

    #[inline]
    pub(crate) fn hill_raw(&self, k: usize) -> f64 {
        (self.log_excess_sum(k, self.ln_sorted[k]) / k as f64).max(0.0)
    }

    /// All Hill estimates `ĥ_{n,1}, …, ĥ_{n,n−1}`.
    pub fn hill_path(&self) -> Vec<f64> {
        (1..self.len()).map(|k| self.hill_raw(k)).collect()
    }

    /// Local estimator `θ̂_{n,t} = (1/n̂_t) Σ_{X_i > t} log(X_i / t)`, zero when `n̂_t = 0`.
    pub fn theta_local(&self, t: f64) -> Result<ParetoIndex> {
        if !(t > 0.0) {
            return Err(Error::argument(format!("threshold must be positive, got {t}")));
        }
        let n_t = self.count_exceed(t);
        Ok(ParetoIndex::from_raw(self.theta_from_count(n_t, t.ln())))
    }

    #[inline]
    pub(crate) fn theta_from_count(&self, n_t: usize, ln_t: f64) -> f64 {
        if n_t == 0 {
            0.0
        } else {
            (self.log_excess_sum(n_t, ln_t) / n_t as f64).max(0.0)
        }
    }

    /// Band estimator `θ̂_{n,t,τ} = (n̂_t θ̂_{n,t} − n̂_τ θ̂_{n,τ}) / n̂_{t,τ}`;
    /// zero for an empty band or when `t ≥ X_{n,1}`.
    pub fn theta_band(&self, t: f64, tau: f64) -> Result<ParetoIndex> {
        if !(t > 0.0) {
            return Err(Error::argument(format!("threshold must be positive, got {t}")));
        }
        let counts = self.counts(t, tau)?;
        let n_tau = counts.n_t - counts.n_t_tau;
        Ok(ParetoIndex::from_raw(band_raw(self, counts.n_t, t.ln(), n_tau, tau.ln())))
    }

    /// Local log-likelihood ratio of `P_{θ_alt}` against `P_{θ_null}` on the excesses over `t`.
    pub fn loglik_ratio(&self, t: f64, theta_alt: ParetoIndex, theta_null: ParetoIndex) -> Result<f64> {
        if theta_alt.is_zero() || theta_null.is_zero() {
            return Err(Error::domain("log-likelihood ratio needs positive indices"));
        }
        if !(t > 0.0) {
            return Err(Error::argument(format!("threshold must be positive, got {t}")));
        }
        let n_t = self.count_exceed(t);
        if n_t == 0 {
            return Ok(0.0);
        }
        let (a, b) = (theta_alt.get(), theta_null.get());
        let mean = self.log_excess_sum(n_t, t.ln()) / n_t as f64;
        Ok(n_t as f64 * ((b / a).ln() + (1.0 / b - 1.0 / a) * mean))
    }

    /// `n̂_t · K(θ̂_{n,t}, θ)`, the closed form of the maximised log-likelihood ratio.
    pub fn max_loglik_ratio(&self, t: f64, theta_null: ParetoIndex) -> Result<Divergence> {
        let n_t = self.count_exceed(t);
        let th = self.theta_local(t)?;
        Ok(Divergence::from_scaled(n_t, kl_raw(th.get(), theta_null.get())))
    }
}

/// Band estimate from counts; `n_t`/`n_tau` observations lie strictly above
/// `t`/`τ` respectively.
#[inline]
pub(crate) fn band_raw(sample: &Sample, n_t: usize, ln_t: f64, n_tau: usize, ln_tau: f64) -> f64 {
    let n_band = n_t - n_tau;
    if n_band == 0 {
        return 0.0;
    }
    // Σ_{t<X≤τ} log(X/t) + n̂_τ log(τ/t)
    let band_logs = sample.ln_prefix[n_t] - sample.ln_prefix[n_tau] - n_band as f64 * ln_t;
    let total = band_logs + n_tau as f64 * (ln_tau - ln_t);
    (total / n_band as f64).max(0.0)
}

impl Divergence {
    /// `count · K`, with an empty count contributing zero even when `K = ∞`.
    pub(crate) fn from_scaled(count: usize, k: f64) -> Divergence {
        if count == 0 {
            Divergence::zero()
        } else {
            Divergence::from_raw(count as f64 * k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::kl_pareto;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn toy() -> Sample {
        Sample::new(vec![E, E * E, 1.0]).unwrap()
    }

    #[test]
    fn construction_rejects_non_positive() {
        assert!(matches!(Sample::new(vec![1.0, 0.0]), Err(Error::Domain(_))));
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
        assert!(Sample::new(vec![]).is_err());
    }

    #[test]
    fn order_is_descending_and_stable() {
        let s = Sample::new(vec![2.0, 5.0, 2.0, 7.0]).unwrap();
        assert_eq!(s.sorted_desc(), &[7.0, 5.0, 2.0, 2.0]);
        assert_eq!(s.order_desc(), &[3, 1, 0, 2]);
        assert_eq!(s.count_above_order_stat(3), 2);
        assert_eq!(s.count_above_order_stat(4), 2);
    }

    #[test]
    fn hill_examples() {
        let s = toy();
        assert!((s.hill(1).unwrap().get() - 1.0).abs() < 1e-15);
        assert!((s.hill(2).unwrap().get() - 1.5).abs() < 1e-15);
        assert!(s.hill(0).is_err());
        assert!(s.hill(3).is_err());
        let flat = Sample::new(vec![3.3; 3]).unwrap();
        assert_eq!(flat.hill(1).unwrap().get(), 0.0);
        assert_eq!(flat.hill(2).unwrap().get(), 0.0);
    }

    #[test]
    fn count_exceed_examples() {
        let s = toy();
        assert_eq!(s.count_exceed(1.0), 2);
        assert_eq!(s.count_exceed(E * E), 0);
        assert_eq!(s.count_exceed(0.5), 3);
    }

    #[test]
    fn theta_local_examples() {
        let s = toy();
        assert!((s.theta_local(1.0).unwrap().get() - 1.5).abs() < 1e-15);
        assert!((s.theta_local(E).unwrap().get() - 1.0).abs() < 1e-15);
        assert_eq!(s.theta_local(E.powi(3)).unwrap().get(), 0.0);
        assert!(s.theta_local(0.0).is_err());
    }

    #[test]
    fn theta_band_examples() {
        let s = toy();
        assert!((s.theta_band(1.0, E).unwrap().get() - 2.0).abs() < 1e-15);
        assert_eq!(s.theta_band(E * E, E.powi(3)).unwrap().get(), 0.0);
        assert_eq!(s.theta_band(1.0, 10.0).unwrap(), s.theta_local(1.0).unwrap());
        assert!(s.theta_band(2.0, 1.0).is_err());
    }

    #[test]
    fn loglik_ratio_examples() {
        let s = toy();
        let one = ParetoIndex::new(1.0).unwrap();
        let alt = ParetoIndex::new(1.5).unwrap();
        assert_eq!(s.loglik_ratio(1.0, one, one).unwrap(), 0.0);
        let v = s.loglik_ratio(1.0, alt, one).unwrap();
        assert!((v - 0.189_069_7).abs() < 1e-7, "{v}");
        assert!((v - 2.0 * kl_pareto(alt, one).get()).abs() < 1e-15);
        assert!(s.loglik_ratio(1.0, ParetoIndex::ZERO, one).is_err());
    }

    fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1e4, 3..60)
    }

    proptest! {
        #[test]
        fn hill_scale_invariant(v in sample_strategy(), c in 1e-3f64..1e3) {
            let s = Sample::new(v.clone()).unwrap();
            let sc = Sample::new(v.iter().map(|x| x * c).collect()).unwrap();
            for k in 1..s.len() {
                let (a, b) = (s.hill(k).unwrap().get(), sc.hill(k).unwrap().get());
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
        }

        #[test]
        fn hill_power_covariant(v in sample_strategy(), c in 0.1f64..10.0) {
            let s = Sample::new(v.clone()).unwrap();
            let sp = Sample::new(v.iter().map(|x| x.powf(c)).collect()).unwrap();
            for k in 1..s.len() {
                let (a, b) = (c * s.hill(k).unwrap().get(), sp.hill(k).unwrap().get());
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
        }

        #[test]
        fn theta_local_matches_hill_at_order_stats(v in sample_strategy()) {
            let s = Sample::new(v).unwrap();
            let distinct = s.sorted_desc().windows(2).all(|w| w[0] > w[1]);
            prop_assume!(distinct);
            for k in 1..s.len() {
                let t = s.order_stat(k + 1).unwrap();
                let (a, b) = (s.theta_local(t).unwrap().get(), s.hill(k).unwrap().get());
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }

        #[test]
        fn counting_identity(v in sample_strategy(), a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let s = Sample::new(v).unwrap();
            let (t, tau) = if a <= b { (a, b) } else { (b, a) };
            let c = s.counts(t, tau).unwrap();
            prop_assert_eq!(c.n_t_tau, s.count_exceed(t) - s.count_exceed(tau));
            prop_assert!(c.n_t <= s.len());
        }

        #[test]
        fn theta_band_scale_invariant(v in sample_strategy(), c in 1e-2f64..1e2, a in 0.01f64..1e4, b in 0.01f64..1e4) {
            let s = Sample::new(v.clone()).unwrap();
            let sc = Sample::new(v.iter().map(|x| x * c).collect()).unwrap();
            let (t, tau) = if a <= b { (a, b) } else { (b, a) };
            let x = s.theta_band(t, tau).unwrap().get();
            let y = sc.theta_band(t * c, tau * c).unwrap().get();
            prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
    }
}
