//! Monte Carlo critical values from the standard Pareto null.
//!
//! Under a Pareto law every statistic `T_{n,m,k}` is a function of the
//! log-spacings only, so the null distribution of `T_n` is free of the
//! Pareto index and can be simulated once per `(n, grid)`.

use serde::{Deserialize, Serialize};

use crate::adaptive::{max_statistic, AdaptiveConfig, CriticalValue};
use crate::distributions::Law;
use crate::error::{Error, Result};
use crate::par::{map_reps, rep_rng, Exec};

/// Below this many replications the result is flagged as low precision.
pub const MIN_RELIABLE_REPS: usize = 100;

/// The grid part of [`AdaptiveConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub rho: f64,
    pub delta: f64,
    pub k0: usize,
    pub grid_len: usize,
}

impl From<&AdaptiveConfig> for GridConfig {
    fn from(c: &AdaptiveConfig) -> Self {
        GridConfig { rho: c.rho, delta: c.delta, k0: c.k0, grid_len: c.grid_len }
    }
}

impl GridConfig {
    pub fn with_critical_value(&self, critical_value: CriticalValue) -> AdaptiveConfig {
        AdaptiveConfig { rho: self.rho, delta: self.delta, k0: self.k0, grid_len: self.grid_len, critical_value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub z: f64,
    pub level: f64,
    pub n: usize,
    pub n_rep: usize,
    pub config: GridConfig,
    /// Sorted simulated maxima `T_n`; may be dropped before persisting.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ecdf: Vec<f64>,
    pub seed: u64,
}

impl CalibrationResult {
    pub fn low_precision(&self) -> bool {
        self.n_rep < MIN_RELIABLE_REPS
    }

    /// Config using the calibrated `z`.
    pub fn adaptive_config(&self) -> AdaptiveConfig {
        self.config.with_critical_value(CriticalValue::Fixed(self.z))
    }

    /// `z` at another level from the stored ecdf.
    pub fn z_at(&self, level: f64) -> Result<f64> {
        if self.ecdf.is_empty() {
            return Err(Error::argument("calibration result was stored without its ecdf"));
        }
        empirical_quantile(&self.ecdf, level)
    }
}

/// Order statistic of index `⌈level·len⌉` of an ascending slice.
pub fn empirical_quantile(sorted: &[f64], level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::argument(format!("level must lie in (0, 1), got {level}")));
    }
    if sorted.is_empty() {
        return Err(Error::argument("empirical quantile of an empty sample"));
    }
    let idx = ((level * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[idx - 1])
}

/// Critical value from standard Pareto samples of size `n`.
pub fn calibrate(
    n: usize,
    config: &AdaptiveConfig,
    n_rep: usize,
    level: f64,
    seed: u64,
    exec: Exec,
) -> Result<CalibrationResult> {
    calibrate_null(1.0, n, config, n_rep, level, seed, exec)
}

/// As [`calibrate`], simulating from Pareto(`theta`) on the same uniform streams.
pub fn calibrate_null(
    theta: f64,
    n: usize,
    config: &AdaptiveConfig,
    n_rep: usize,
    level: f64,
    seed: u64,
    exec: Exec,
) -> Result<CalibrationResult> {
    config.validate(n)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::argument(format!("level must lie in (0, 1), got {level}")));
    }
    if n_rep == 0 {
        return Err(Error::argument("calibration needs at least one replication"));
    }
    let law = Law::pareto(theta)?;
    let mut ecdf = map_reps(exec, n_rep, |rep| {
        let sample = law.sample(n, &mut rep_rng(seed, rep))?;
        max_statistic(&sample, config)
    })?;
    ecdf.sort_by(f64::total_cmp);
    let z = empirical_quantile(&ecdf, level)?;
    Ok(CalibrationResult { z, level, n, n_rep, config: config.into(), ecdf, seed })
}
