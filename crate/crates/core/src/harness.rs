//! Simulation study: RelMSE of adaptive versus fixed-`k` quantiles, sample
//! quantiles versus adaptive quantiles, and RMSE of the index estimates.

use serde::{Deserialize, Serialize};

use crate::adaptive::{select, AdaptiveConfig, TailSelection};
use crate::distributions::{Law, LawSpec};
use crate::error::{Error, Result};
use crate::estimators::Sample;
use crate::par::{fold_reps, rep_rng, Exec};
use crate::quantiles::{extrapolate, quantile_adaptive, quantile_fixed_k};

/// `p` levels of the quantile-ratio table.
pub const TABLE1_P_GRID: [f64; 10] =
    [0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999, 0.9999999, 0.99999999, 0.999999999, 0.9999999999];

/// `k` values of the sample-quantile comparison table.
pub const TABLE2_K_GRID: [usize; 14] = [1, 2, 3, 4, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90];

/// Fixed-`k` scan `2..=n−1`, every `stride`-th value.
pub fn default_k_grid(n: usize, stride: usize) -> Vec<usize> {
    (2..n).step_by(stride.max(1)).collect()
}

/// Running sum of squared log-errors; non-positive or non-finite estimates
/// are counted as exclusions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct LogErr {
    sum_sq: f64,
    used: u64,
    excluded: u64,
}

impl LogErr {
    #[inline]
    fn push(&mut self, estimate: f64, ln_truth: f64) {
        if estimate > 0.0 && estimate.is_finite() {
            let e = estimate.ln() - ln_truth;
            self.sum_sq += e * e;
            self.used += 1;
        } else {
            self.excluded += 1;
        }
    }

    fn merge(&mut self, other: &LogErr) {
        self.sum_sq += other.sum_sq;
        self.used += other.used;
        self.excluded += other.excluded;
    }

    fn value(&self) -> f64 {
        if self.used == 0 {
            f64::NAN
        } else {
            (self.sum_sq / self.used as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelMse {
    pub value: f64,
    pub used: usize,
    pub excluded: usize,
}

/// `sqrt(mean log²(estimate/truth))` over the positive estimates.
pub fn relmse(estimates: &[f64], truth: f64) -> Result<RelMse> {
    if estimates.is_empty() {
        return Err(Error::argument("RelMSE of an empty list"));
    }
    if !(truth > 0.0 && truth.is_finite()) {
        return Err(Error::domain(format!("RelMSE needs a positive finite truth, got {truth}")));
    }
    let mut acc = LogErr::default();
    let lt = truth.ln();
    for &e in estimates {
        acc.push(e, lt);
    }
    if acc.used == 0 {
        return Err(Error::domain("RelMSE: every estimate was excluded"));
    }
    Ok(RelMse { value: acc.value(), used: acc.used as usize, excluded: acc.excluded as usize })
}

/// Numeric matrix with column labels. `NaN` marks a cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Table {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell in the first row whose column `key` equals `key_value`.
    pub fn lookup(&self, key: &str, key_value: f64, column: &str) -> Option<f64> {
        let (k, c) = (self.column(key)?, self.column(column)?);
        self.rows.iter().find(|r| r[k] == key_value).map(|r| r[c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub software: String,
    pub version: String,
    /// Unix seconds; `SOURCE_DATE_EPOCH` when set.
    pub generated_unix: u64,
}

impl Provenance {
    pub fn now() -> Provenance {
        let generated_unix =
            std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()).unwrap_or_else(|| {
                std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
            });
        Provenance {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generated_unix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub law: LawSpec,
    pub n: usize,
    pub n_rep: usize,
    pub config: AdaptiveConfig,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// `{law}_{n}_{experiment}` for the first table, `…_{table}` for the rest.
    pub fn file_stem(&self, table: &Table) -> String {
        let base = format!("{}_{}_{}", self.law.name(), self.n, self.experiment);
        if self.tables.first().is_some_and(|t| t.name == table.name) {
            base
        } else {
            format!("{base}_{}", table.name)
        }
    }
}

/// Replication count, sample size, seed and execution mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub n: usize,
    pub n_rep: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl McSettings {
    fn check(&self, config: &AdaptiveConfig) -> Result<()> {
        if self.n_rep == 0 {
            return Err(Error::argument("experiments need at least one replication"));
        }
        config.validate(self.n)
    }

    fn warnings(&self) -> Vec<String> {
        if self.n_rep < crate::calibration::MIN_RELIABLE_REPS {
            vec![format!("low-precision estimate: only {} replications", self.n_rep)]
        } else {
            Vec::new()
        }
    }
}

fn rep_selection(law: &Law, mc: &McSettings, config: &AdaptiveConfig, rep: usize) -> Result<(Sample, TailSelection)> {
    let sample = law.sample(mc.n, &mut rep_rng(mc.seed, rep))?;
    let sel = select(&sample, config)?;
    Ok((sample, sel))
}

#[derive(Debug, Clone, Default)]
struct SelectionStats {
    k_hats: Vec<usize>,
    rejected: usize,
}

impl SelectionStats {
    fn push(&mut self, sel: &TailSelection) {
        self.k_hats.push(sel.k_hat);
        self.rejected += sel.rejected as usize;
    }

    fn merge(&mut self, mut other: SelectionStats) {
        self.k_hats.append(&mut other.k_hats);
        self.rejected += other.rejected;
    }

    fn table(&self) -> Table {
        let mut t = Table::new("selection", &["rejected_fraction", "mean_k_hat", "median_k_hat"]);
        let n = self.k_hats.len().max(1) as f64;
        let mut k = self.k_hats.clone();
        k.sort_unstable();
        let median = if k.is_empty() {
            f64::NAN
        } else if k.len() % 2 == 1 {
            k[k.len() / 2] as f64
        } else {
            0.5 * (k[k.len() / 2 - 1] + k[k.len() / 2]) as f64
        };
        t.rows.push(vec![self.rejected as f64 / n, k.iter().sum::<usize>() as f64 / n, median]);
        t
    }
}

fn true_quantiles(law: &Law, tails: impl Iterator<Item = f64>, warnings: &mut Vec<String>) -> Vec<f64> {
    tails
        .map(|s| match law.quantile_sf(s) {
            Ok(q) if q > 0.0 && q.is_finite() => q,
            Ok(q) => {
                warnings.push(format!("true quantile at tail probability {s:e} is {q}; cells marked NaN"));
                f64::NAN
            }
            Err(e) => {
                warnings.push(format!("true quantile at tail probability {s:e} unavailable ({e}); cells marked NaN"));
                f64::NAN
            }
        })
        .collect()
}

fn wiring_check(sample: &Sample, sel: &TailSelection, p: f64, adaptive: f64) -> Result<()> {
    if sel.k_hat >= 2 {
        let fixed = quantile_fixed_k(sample, sel.k_hat, p)?;
        if fixed.to_bits() != adaptive.to_bits() {
            return Err(Error::numeric(
                format!("adaptive quantile differs from the fixed-k quantile at k̂ = {} for p = {p}", sel.k_hat),
                adaptive - fixed,
            ));
        }
    }
    Ok(())
}

/// Ratios `r_{n,p} = σ(q̂_{n,p}) / min_k σ(q̂_{n,k,p})`.
pub fn quantile_ratio_experiment(
    law: &Law,
    mc: &McSettings,
    config: &AdaptiveConfig,
    p_grid: &[f64],
    k_grid: &[usize],
) -> Result<ExperimentReport> {
    mc.check(config)?;
    if p_grid.is_empty() || p_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::argument("p grid must be a nonempty subset of (0, 1)"));
    }
    if k_grid.is_empty() || k_grid.iter().any(|&k| k < 2 || k > mc.n) {
        return Err(Error::argument(format!("k grid must be a nonempty subset of 2..={}", mc.n)));
    }
    let mut warnings = mc.warnings();
    let truth = true_quantiles(law, p_grid.iter().map(|p| 1.0 - p), &mut warnings);
    let ln_truth: Vec<f64> = truth.iter().map(|q| q.ln()).collect();
    let (np, nk) = (p_grid.len(), k_grid.len());

    struct Acc {
        adaptive: Vec<LogErr>,
        fixed: Vec<LogErr>,
        stats: SelectionStats,
    }
    let acc = fold_reps(
        mc.exec,
        mc.n_rep,
        || Acc {
            adaptive: vec![LogErr::default(); np],
            fixed: vec![LogErr::default(); np * nk],
            stats: Default::default(),
        },
        |acc, rep| {
            let (sample, sel) = rep_selection(law, mc, config, rep)?;
            acc.stats.push(&sel);
            let n1 = mc.n - 1;
            for (j, &p) in p_grid.iter().enumerate() {
                if truth[j].is_nan() {
                    continue;
                }
                let qa = quantile_adaptive(&sample, &sel, p)?;
                wiring_check(&sample, &sel, p, qa)?;
                acc.adaptive[j].push(qa, ln_truth[j]);
                for (i, &k) in k_grid.iter().enumerate() {
                    let q = extrapolate(&sample, k, sample.hill_raw(k.min(n1)), p);
                    acc.fixed[j * nk + i].push(q, ln_truth[j]);
                }
            }
            Ok(())
        },
        |a, b| {
            a.adaptive.iter_mut().zip(&b.adaptive).for_each(|(x, y)| x.merge(y));
            a.fixed.iter_mut().zip(&b.fixed).for_each(|(x, y)| x.merge(y));
            a.stats.merge(b.stats);
        },
    )?;

    let mut ratios = Table::new(
        "ratios",
        &["p", "q_p", "sigma_adaptive", "sigma_fixed_min", "k_min", "r_np", "excluded_adaptive", "excluded_fixed"],
    );
    let mut curve_cols = vec!["k".to_string()];
    curve_cols.extend(p_grid.iter().map(|p| format!("sigma_fixed_p{p}")));
    let mut curve = Table { name: "fixed_curve".into(), columns: curve_cols, rows: Vec::with_capacity(nk) };
    for (i, &k) in k_grid.iter().enumerate() {
        let mut row = vec![k as f64];
        row.extend((0..np).map(|j| acc.fixed[j * nk + i].value()));
        curve.rows.push(row);
    }
    for (j, &p) in p_grid.iter().enumerate() {
        let sa = acc.adaptive[j].value();
        let (mut best, mut k_best) = (f64::INFINITY, f64::NAN);
        for (i, &k) in k_grid.iter().enumerate() {
            let v = acc.fixed[j * nk + i].value();
            if v < best {
                best = v;
                k_best = k as f64;
            }
        }
        if !best.is_finite() {
            best = f64::NAN;
        }
        let excluded_fixed: u64 = (0..nk).map(|i| acc.fixed[j * nk + i].excluded).sum();
        ratios.rows.push(vec![
            p,
            truth[j],
            sa,
            best,
            k_best,
            sa / best,
            acc.adaptive[j].excluded as f64,
            excluded_fixed as f64,
        ]);
    }
    Ok(report("table1", law, mc, config, vec![ratios, curve, acc.stats.table()], warnings))
}

/// Ratios `r⁰_{n,k} = σ(X_{n,k}) / σ(q̂_{n,p_{n,k}})` with `p_{n,k} = 1 − k/n`.
pub fn sample_quantile_comparison(
    law: &Law,
    mc: &McSettings,
    config: &AdaptiveConfig,
    k_grid: &[usize],
) -> Result<ExperimentReport> {
    mc.check(config)?;
    if k_grid.is_empty() || k_grid.iter().any(|&k| k < 1 || k >= mc.n) {
        return Err(Error::argument(format!("k grid must be a nonempty subset of 1..{}", mc.n)));
    }
    let mut warnings = mc.warnings();
    let n = mc.n as f64;
    let truth = true_quantiles(law, k_grid.iter().map(|&k| k as f64 / n), &mut warnings);
    let ln_truth: Vec<f64> = truth.iter().map(|q| q.ln()).collect();
    let nk = k_grid.len();

    struct Acc {
        order: Vec<LogErr>,
        adaptive: Vec<LogErr>,
        stats: SelectionStats,
    }
    let acc = fold_reps(
        mc.exec,
        mc.n_rep,
        || Acc { order: vec![LogErr::default(); nk], adaptive: vec![LogErr::default(); nk], stats: Default::default() },
        |acc, rep| {
            let (sample, sel) = rep_selection(law, mc, config, rep)?;
            acc.stats.push(&sel);
            for (i, &k) in k_grid.iter().enumerate() {
                if truth[i].is_nan() {
                    continue;
                }
                let p = 1.0 - k as f64 / n;
                let qa = quantile_adaptive(&sample, &sel, p)?;
                wiring_check(&sample, &sel, p, qa)?;
                acc.adaptive[i].push(qa, ln_truth[i]);
                acc.order[i].push(sample.sorted_desc()[k - 1], ln_truth[i]);
            }
            Ok(())
        },
        |a, b| {
            a.order.iter_mut().zip(&b.order).for_each(|(x, y)| x.merge(y));
            a.adaptive.iter_mut().zip(&b.adaptive).for_each(|(x, y)| x.merge(y));
            a.stats.merge(b.stats);
        },
    )?;
    let mut t =
        Table::new("ratios", &["k", "p", "q_p", "sigma_sample", "sigma_adaptive", "r0_nk", "excluded_adaptive"]);
    for (i, &k) in k_grid.iter().enumerate() {
        let (so, sa) = (acc.order[i].value(), acc.adaptive[i].value());
        t.rows.push(vec![k as f64, 1.0 - k as f64 / n, truth[i], so, sa, so / sa, acc.adaptive[i].excluded as f64]);
    }
    Ok(report("table2", law, mc, config, vec![t, acc.stats.table()], warnings))
}

/// RMSE of `θ̂_n` and of every Hill estimate `ĥ_{n,k}`, `k = 1..n−1`, around `gamma`.
pub fn gamma_rmse_experiment(
    law: &Law,
    gamma: f64,
    mc: &McSettings,
    config: &AdaptiveConfig,
) -> Result<ExperimentReport> {
    mc.check(config)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::argument(format!("gamma must be positive, got {gamma}")));
    }
    if mc.n < 2 {
        return Err(Error::argument("gamma RMSE needs n ≥ 2"));
    }
    let warnings = mc.warnings();
    let nk = mc.n - 1;

    struct Acc {
        adaptive: f64,
        hill: Vec<f64>,
        stats: SelectionStats,
    }
    let acc = fold_reps(
        mc.exec,
        mc.n_rep,
        || Acc { adaptive: 0.0, hill: vec![0.0; nk], stats: Default::default() },
        |acc, rep| {
            let (sample, sel) = rep_selection(law, mc, config, rep)?;
            acc.stats.push(&sel);
            let e = sel.theta_hat.get() - gamma;
            acc.adaptive += e * e;
            for (k, slot) in acc.hill.iter_mut().enumerate() {
                let e = sample.hill_raw(k + 1) - gamma;
                *slot += e * e;
            }
            Ok(())
        },
        |a, b| {
            a.adaptive += b.adaptive;
            a.hill.iter_mut().zip(&b.hill).for_each(|(x, y)| *x += y);
            a.stats.merge(b.stats);
        },
    )?;
    let reps = mc.n_rep as f64;
    let mut curve = Table::new("hill_curve", &["k", "sigma_hill"]);
    let (mut best, mut k_best) = (f64::INFINITY, 0usize);
    for (k, s) in acc.hill.iter().enumerate() {
        let v = (s / reps).sqrt();
        if v < best {
            best = v;
            k_best = k + 1;
        }
        curve.rows.push(vec![(k + 1) as f64, v]);
    }
    let sa = (acc.adaptive / reps).sqrt();
    let mut summary = Table::new("summary", &["gamma", "sigma_adaptive", "sigma_hill_min", "k_min", "r_gamma"]);
    summary.rows.push(vec![gamma, sa, best, k_best as f64, sa / best]);
    Ok(report("gamma_rmse", law, mc, config, vec![summary, curve, acc.stats.table()], warnings))
}

fn report(
    experiment: &str,
    law: &Law,
    mc: &McSettings,
    config: &AdaptiveConfig,
    tables: Vec<Table>,
    warnings: Vec<String>,
) -> ExperimentReport {
    ExperimentReport {
        experiment: experiment.into(),
        law: law.spec().clone(),
        n: mc.n,
        n_rep: mc.n_rep,
        config: *config,
        seed: mc.seed,
        tables,
        warnings,
        provenance: Provenance::now(),
    }
}
