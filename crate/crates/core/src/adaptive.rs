//! Stagewise adaptive choice of the tail: test `T_{n,r_i}` along a uniform
//! grid and stop at the first rejection.

use serde::{Deserialize, Serialize};

use crate::changepoint::{check_window_constants, t_window, window_bounds};
use crate::divergences::ParetoIndex;
use crate::error::{Error, Result};
use crate::estimators::Sample;

/// Critical value `𝔷`: a fixed number or `μ log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalValue {
    Fixed(f64),
    MuLogN(f64),
}

impl CriticalValue {
    pub fn value(self, n: usize) -> f64 {
        match self {
            CriticalValue::Fixed(z) => z,
            CriticalValue::MuLogN(mu) => mu * (n as f64).ln(),
        }
    }

    fn validate(self) -> Result<()> {
        let v = match self {
            CriticalValue::Fixed(z) => z,
            CriticalValue::MuLogN(mu) => mu,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::config(format!("critical value must be positive and finite, got {self:?}")));
        }
        Ok(())
    }
}

pub const DEFAULT_RHO: f64 = 0.25;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_K0_FRACTION: f64 = 0.05;
pub const DEFAULT_GRID_LEN: usize = 200;
pub const DEFAULT_Z: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub rho: f64,
    pub delta: f64,
    /// Starting grid index (1-based).
    pub k0: usize,
    /// Grid length `K_n`.
    pub grid_len: usize,
    pub critical_value: CriticalValue,
}

/// One distinct grid value and the first index producing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub r: usize,
}

fn check_grid_len(n: usize, grid_len: usize) -> Result<()> {
    if grid_len < 1 || grid_len > n {
        return Err(Error::config(format!("grid length K_n = {grid_len} must lie in 1..={n}")));
    }
    Ok(())
}

#[inline]
fn grid_value(i: usize, n: usize, grid_len: usize) -> usize {
    // exact integer floor of i·n/K
    ((i as u128 * n as u128) / grid_len as u128) as usize
}

/// `r_i = ⌊i n / K_n⌋` for `i = 1..K_n`, repeated values dropped.
pub fn build_grid(n: usize, grid_len: usize) -> Result<Vec<GridPoint>> {
    check_grid_len(n, grid_len)?;
    let mut out: Vec<GridPoint> = Vec::with_capacity(grid_len);
    for i in 1..=grid_len {
        let r = grid_value(i, n, grid_len);
        if r == 0 || out.last().is_some_and(|g| g.r == r) {
            continue;
        }
        out.push(GridPoint { index: i, r });
    }
    Ok(out)
}

const FEAS_SLACK: f64 = 1e-9;

fn k0_feasible(n: usize, grid_len: usize, rho: f64, delta: f64, k0: usize) -> bool {
    if k0 < 1 || k0 > grid_len {
        return false;
    }
    let r1 = grid_value(1, n, grid_len) as f64;
    if rho * (grid_value(k0, n, grid_len) as f64) < r1 - FEAS_SLACK {
        return false;
    }
    (k0..=grid_len).all(|i| {
        let prev = if i == 1 { 0 } else { grid_value(i - 1, n, grid_len) };
        (1.0 - delta) * grid_value(i, n, grid_len) as f64 <= prev as f64 + FEAS_SLACK
    })
}

/// Smallest feasible starting index at or above `requested`.
///
/// Both grid conditions only get easier as `k0` grows, so this is the
/// nearest feasible index whenever `requested` itself is infeasible.
pub fn nearest_feasible_k0(n: usize, grid_len: usize, rho: f64, delta: f64, requested: usize) -> Result<usize> {
    check_window_constants(rho, delta)?;
    check_grid_len(n, grid_len)?;
    let start = requested.clamp(1, grid_len);
    (start..=grid_len)
        .find(|&k0| {
            k0_feasible(n, grid_len, rho, delta, k0) && window_bounds(grid_value(k0, n, grid_len), rho, delta).is_ok()
        })
        .ok_or_else(|| {
            // the largest index is the easiest; report why even it fails
            let last =
                AdaptiveConfig { rho, delta, k0: grid_len, grid_len, critical_value: CriticalValue::Fixed(DEFAULT_Z) };
            let why = match last.validate(n) {
                Err(Error::Config(m)) => format!(": {m}"),
                Err(e) => format!(": {e}"),
                Ok(()) => String::new(),
            };
            Error::config(format!(
                "no feasible starting index for n = {n}, K_n = {grid_len}, rho = {rho}, delta = {delta}{why}"
            ))
        })
}

impl AdaptiveConfig {
    /// Defaults `ρ = 1/4`, `δ = 1/20`, `k0 = n/20`, `K_n = 200`, `𝔷 = 10`,
    /// with `k0` moved up to the nearest feasible index.
    pub fn defaults_for(n: usize) -> Result<AdaptiveConfig> {
        let grid_len = DEFAULT_GRID_LEN.min(n);
        Self::with_k0_fraction(
            n,
            DEFAULT_RHO,
            DEFAULT_DELTA,
            DEFAULT_K0_FRACTION,
            grid_len,
            CriticalValue::Fixed(DEFAULT_Z),
        )
    }

    /// Builds a config whose `k0` is `fraction·n` rounded, then made feasible.
    pub fn with_k0_fraction(
        n: usize,
        rho: f64,
        delta: f64,
        fraction: f64,
        grid_len: usize,
        critical_value: CriticalValue,
    ) -> Result<AdaptiveConfig> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::config(format!("k0 fraction must lie in (0, 1], got {fraction}")));
        }
        let requested = ((fraction * n as f64).round() as usize).max(1);
        let k0 = nearest_feasible_k0(n, grid_len, rho, delta, requested)?;
        let cfg = AdaptiveConfig { rho, delta, k0, grid_len, critical_value };
        cfg.validate(n)?;
        Ok(cfg)
    }

    pub fn z(&self, n: usize) -> f64 {
        self.critical_value.value(n)
    }

    /// Checks window constants, the grid, and both grid feasibility conditions for sample size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        check_window_constants(self.rho, self.delta)?;
        self.critical_value.validate()?;
        check_grid_len(n, self.grid_len)?;
        let k = self.grid_len;
        if self.k0 < 1 || self.k0 > k {
            return Err(Error::config(format!("starting index k0 = {} must lie in 1..={k}", self.k0)));
        }
        let r1 = grid_value(1, n, k);
        let rk0 = grid_value(self.k0, n, k);
        if self.rho * (rk0 as f64) < r1 as f64 - FEAS_SLACK {
            return Err(Error::config(format!(
                "grid condition rho·r_k0 ≥ r_1 fails: {}·{rk0} < {r1} (n = {n}, k0 = {})",
                self.rho, self.k0
            )));
        }
        for i in self.k0..=k {
            let prev = if i == 1 { 0 } else { grid_value(i - 1, n, k) };
            let ri = grid_value(i, n, k);
            if (1.0 - self.delta) * ri as f64 > prev as f64 + FEAS_SLACK {
                return Err(Error::config(format!(
                    "grid condition (1−delta)·r_i ≤ r_(i−1) fails at i = {i}: (1−{})·{ri} > {prev} (n = {n}, K_n = {k}, k0 = {})",
                    self.delta, self.k0
                )));
            }
        }
        window_bounds(rk0, self.rho, self.delta)?;
        Ok(())
    }

    /// Distinct grid points with index `≥ k0`.
    pub fn tested_grid(&self, n: usize) -> Result<Vec<GridPoint>> {
        self.validate(n)?;
        let mut out: Vec<GridPoint> = Vec::with_capacity(self.grid_len + 1 - self.k0);
        for i in self.k0..=self.grid_len {
            let r = grid_value(i, n, self.grid_len);
            if out.last().is_some_and(|g| g.r == r) {
                continue;
            }
            out.push(GridPoint { index: i, r });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub r: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSelection {
    pub n: usize,
    pub m_hat: usize,
    pub k_hat: usize,
    pub tau_hat: f64,
    pub theta_hat: ParetoIndex,
    pub rejected: bool,
    pub trace: Vec<TraceEntry>,
}

/// Runs the sequential test and returns the selected tail.
pub fn select(sample: &Sample, config: &AdaptiveConfig) -> Result<TailSelection> {
    let n = sample.len();
    let grid = config.tested_grid(n)?;
    let z = config.z(n);
    let mut trace = Vec::with_capacity(grid.len());
    for g in &grid {
        let w = t_window(sample, g.r, config.rho, config.delta)?;
        trace.push(TraceEntry { r: g.r, t: w.t_max });
        if w.t_max > z {
            return finish(sample, g.r, w.best_k, true, trace);
        }
    }
    finish(sample, grid_value(config.grid_len, n, config.grid_len), n, false, trace)
}

fn finish(
    sample: &Sample,
    m_hat: usize,
    k_hat: usize,
    rejected: bool,
    trace: Vec<TraceEntry>,
) -> Result<TailSelection> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::argument("adaptive selection needs at least two observations"));
    }
    Ok(TailSelection {
        n,
        m_hat,
        k_hat,
        tau_hat: sample.order_stat(k_hat)?,
        theta_hat: ParetoIndex::from_raw(sample.hill_raw(k_hat.min(n - 1))),
        rejected,
        trace,
    })
}

/// `T_n = max_i T_{n,r_i}` over the whole tested grid, without stopping.
pub fn max_statistic(sample: &Sample, config: &AdaptiveConfig) -> Result<f64> {
    let grid = config.tested_grid(sample.len())?;
    let mut best = f64::NEG_INFINITY;
    for g in &grid {
        best = best.max(t_window(sample, g.r, config.rho, config.delta)?.t_max);
    }
    Ok(best)
}
