use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adaptail::adaptive::TraceEntry;
use adaptail::calibration::MIN_RELIABLE_REPS;
use adaptail::divergences::chi2_excess_vs_pareto;
use adaptail::harness::{
    default_k_grid, gamma_rmse_experiment, quantile_ratio_experiment, sample_quantile_comparison, ExperimentReport,
    McSettings, Provenance, Table, TABLE1_P_GRID, TABLE2_K_GRID,
};
use adaptail::par::rep_rng;
use adaptail::{calibrate, quantile_adaptive, select, AdaptiveConfig, LawSpec, Sample};
use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::input::read_observations;
use crate::settings::{Settings, DEFAULT_ESTIMATE_P};
use crate::{Outcome, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    /// Adaptive versus best fixed-k extreme quantiles
    Table1,
    /// Sample quantiles versus adaptive quantiles
    Table2,
    /// RMSE of the index estimate
    GammaRmse,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Table2 => "table2",
            Experiment::GammaRmse => "gamma_rmse",
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    m_hat: usize,
    k_hat: usize,
    tau_hat: f64,
    theta_hat: f64,
    rejected: bool,
    z: f64,
    config: AdaptiveConfig,
    quantiles: BTreeMap<String, f64>,
    trace: Vec<TraceEntry>,
}

pub fn estimate(s: &Settings) -> Result<Outcome> {
    let input = s.input.as_deref().ok_or_else(|| UsageError("estimate needs --input".into()))?;
    let values = read_observations(input)?;
    let sample = Sample::new(values)?;
    let n = sample.len();
    let mut warnings = Vec::new();
    let cfg = s.adaptive(n, &mut warnings)?;
    let sel = select(&sample, &cfg)?;
    let mut quantiles = BTreeMap::new();
    for p in s.p_levels(&DEFAULT_ESTIMATE_P)? {
        quantiles.insert(p.to_string(), quantile_adaptive(&sample, &sel, p)?);
    }
    let report = EstimateReport {
        n,
        m_hat: sel.m_hat,
        k_hat: sel.k_hat,
        tau_hat: sel.tau_hat,
        theta_hat: sel.theta_hat.get(),
        rejected: sel.rejected,
        z: cfg.z(n),
        config: cfg,
        quantiles,
        trace: sel.trace,
    };

    let dir = s.out_dir()?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    let json = dir.join(format!("{stem}_estimate.json"));
    write_json(&json, &report)?;
    let hill = Table {
        name: "hill".into(),
        columns: vec!["k".into(), "hill".into()],
        rows: sample.hill_path().into_iter().enumerate().map(|(i, h)| vec![(i + 1) as f64, h]).collect(),
    };
    let csv = dir.join(format!("{stem}_hill.csv"));
    write_table(&csv, &hill)?;
    let summary = format!(
        "n = {n}, k̂ = {}, θ̂ = {:.6}, {}",
        report.k_hat,
        report.theta_hat,
        if report.rejected {
            format!("tail starts at {:.6}", report.tau_hat)
        } else {
            "no change point detected".into()
        }
    );
    Ok(Outcome { artifacts: vec![json, csv], warnings, summary: vec![summary], failed: false })
}

pub fn calibrate_cmd(s: &Settings) -> Result<Outcome> {
    let n = s.n();
    let mut warnings = Vec::new();
    let cfg = s.adaptive(n, &mut warnings)?;
    let reps = s.reps();
    if reps < MIN_RELIABLE_REPS {
        warnings.push(format!("low-precision calibration: {reps} replications (fewer than {MIN_RELIABLE_REPS})"));
    }
    let result = calibrate(n, &cfg, reps, s.level()?, s.seed(), s.exec())?;
    let path = s.out_dir()?.join(format!("calibration_n{n}.json"));
    write_json(&path, &result)?;
    let summary = format!("n = {n}, k0 = {}, z = {:.6} at level {}", cfg.k0, result.z, result.level);
    Ok(Outcome { artifacts: vec![path], warnings, summary: vec![summary], failed: false })
}

#[derive(Serialize)]
struct ArtifactDigest {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    law: &'a LawSpec,
    n: usize,
    n_rep: usize,
    seed: u64,
    config: &'a AdaptiveConfig,
    settings: &'a Settings,
    warnings: &'a [String],
    provenance: &'a Provenance,
    artifacts: Vec<ArtifactDigest>,
}

pub fn simulate(experiment: Experiment, s: &Settings) -> Result<Outcome> {
    let law = s.law()?;
    let n = s.n();
    let mut warnings = Vec::new();
    let cfg = s.adaptive(n, &mut warnings)?;
    let mc = McSettings { n, n_rep: s.reps(), seed: s.seed(), exec: s.exec() };
    let report: ExperimentReport = match experiment {
        Experiment::Table1 => {
            quantile_ratio_experiment(&law, &mc, &cfg, &s.p_levels(&TABLE1_P_GRID)?, &default_k_grid(n, 1))?
        }
        Experiment::Table2 => {
            let ks: Vec<usize> = TABLE2_K_GRID.iter().copied().filter(|&k| k < n).collect();
            sample_quantile_comparison(&law, &mc, &cfg, &ks)?
        }
        Experiment::GammaRmse => {
            let gamma = law.tail_index();
            if !(gamma > 0.0 && gamma.is_finite()) {
                bail!(UsageError(format!(
                    "gamma_rmse needs a law with a positive tail index, {} has {gamma}",
                    law.name()
                )));
            }
            gamma_rmse_experiment(&law, gamma, &mc, &cfg)?
        }
    };
    warnings.extend(report.warnings.iter().cloned());

    let dir = s.out_dir()?;
    let mut artifacts = Vec::new();
    let mut digests = Vec::new();
    for t in &report.tables {
        let file = format!("{}.csv", report.file_stem(t));
        let path = dir.join(&file);
        write_table(&path, t)?;
        digests.push(ArtifactDigest { sha256: sha256_file(&path)?, file });
        artifacts.push(path);
    }
    let manifest = Manifest {
        experiment: &report.experiment,
        law: &report.law,
        n: report.n,
        n_rep: report.n_rep,
        seed: report.seed,
        config: &report.config,
        settings: s,
        warnings: &report.warnings,
        provenance: &report.provenance,
        artifacts: digests,
    };
    let mpath = dir.join(format!("{}_{}_{}_manifest.json", report.law.name(), n, report.experiment));
    write_json(&mpath, &manifest)?;
    artifacts.push(mpath);
    let summary = summarize(&report);
    Ok(Outcome { artifacts, warnings, summary, failed: false })
}

fn summarize(report: &ExperimentReport) -> Vec<String> {
    let first = &report.tables[0];
    let mut out =
        vec![format!("{} for {} (n = {}, {} replications)", report.experiment, report.law, report.n, report.n_rep)];
    out.push(first.columns.join("\t"));
    for row in &first.rows {
        out.push(row.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join("\t"));
    }
    out
}

/// Log-spaced thresholds from `t_min` to `t_max`.
fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![t_min];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

pub fn analyze(s: &Settings) -> Result<Outcome> {
    let law = s.law()?;
    let t_min = s.t_min.unwrap_or_else(|| 1.5 * law.support_left().max(1.0));
    let t_max = s.t_max.unwrap_or(1e6);
    let points = s.points.unwrap_or(60);
    if !(t_min > law.support_left() && t_max >= t_min && points >= 1) {
        bail!(UsageError(format!(
            "analyze needs support_left ({}) < t-min ≤ t-max and at least one point",
            law.support_left()
        )));
    }
    let path = s.out_dir()?.join(format!("{}_analyze.csv", law.name()));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["t", "theta_t", "alpha", "chi2", "error"])?;
    let mut failures = 0;
    for t in log_grid(t_min, t_max, points) {
        let (mut theta, mut alpha, mut chi2) = (f64::NAN, f64::NAN, f64::NAN);
        let mut errors = Vec::new();
        match law.theta_fit(t) {
            Ok(th) => {
                theta = th.get();
                match chi2_excess_vs_pareto(&law, t, th) {
                    Ok(c) => chi2 = c.value.get(),
                    Err(e) => errors.push(format!("chi2: {e}")),
                }
            }
            Err(e) => errors.push(format!("theta_t: {e}")),
        }
        match law.alpha(t) {
            Ok(a) => alpha = a,
            Err(e) => errors.push(format!("alpha: {e}")),
        }
        failures += !errors.is_empty() as usize;
        w.write_record([t.to_string(), theta.to_string(), alpha.to_string(), chi2.to_string(), errors.join("; ")])?;
    }
    w.flush()?;
    let mut warnings = Vec::new();
    if failures > 0 {
        warnings.push(format!("{failures} of {points} rows have numerical errors, see the error column"));
    }
    let summary = format!("{} thresholds from {t_min} to {t_max} for {}", points, law.spec());
    Ok(Outcome { artifacts: vec![path], warnings, summary: vec![summary], failed: false })
}

/// Writes `n` draws of a law, one per line, for trying out `estimate`.
pub fn sample(s: &Settings) -> Result<Outcome> {
    let law = s.law()?;
    let n = s.n();
    let seed = s.seed();
    let data = law.sample(n, &mut rep_rng(seed, 0))?;
    let path: PathBuf = s.out_dir()?.join(format!("{}_n{n}_seed{seed}.csv", law.name()));
    let mut text = String::from("x\n");
    for v in data.values() {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(Outcome { artifacts: vec![path], warnings: vec![], summary: vec![], failed: false })
}
