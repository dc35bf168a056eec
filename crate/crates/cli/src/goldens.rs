//! Recorded end-to-end runs. Each case is a command line; blessing stores
//! the canonical form of every artifact and its SHA-256, verifying re-runs
//! the command and compares.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canonical::{canonicalize, CanonicalTable};
use crate::{Cli, Command, Outcome};

pub const CASES_FILE: &str = "cases.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenSet {
    #[serde(rename = "case")]
    pub cases: Vec<GoldenCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenCase {
    pub name: String,
    /// Command line without `--out` and `--seed`; `{dir}` expands to the goldens directory.
    pub args: Vec<String>,
    /// Seed passed as `--seed`, when the run draws random numbers.
    pub seed: Option<u64>,
    /// Seed used to generate the input data, for the record.
    pub input_seed: Option<u64>,
    /// Relative tolerance on numeric cells.
    pub tolerance: f64,
    #[serde(default)]
    pub config_hash: String,
    #[serde(default)]
    pub artifacts: Vec<GoldenArtifact>,
    /// Cells checked against reference values with an explicit band.
    #[serde(default)]
    pub checks: Vec<BandCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenArtifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandCheck {
    pub file: String,
    pub key: String,
    pub key_value: KeyValue,
    pub column: String,
    pub expected: f64,
    /// Absolute half-width.
    pub band: f64,
}

/// Row selector: a number for table artifacts, a flattened key for JSON ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeyValue {
    Num(f64),
    Text(String),
}

impl KeyValue {
    fn matches(&self, cell: &str) -> bool {
        match self {
            KeyValue::Num(x) => cell.parse::<f64>().is_ok_and(|v| (v - x).abs() <= 1e-12 * x.abs()),
            KeyValue::Text(t) => cell == t,
        }
    }
}

impl std::fmt::Display for KeyValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeyValue::Num(x) => write!(f, "{x}"),
            KeyValue::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub only: Option<String>,
    /// Added to every case seed; non-zero values make Monte Carlo cases drift.
    pub seed_offset: u64,
    /// Replaces each case tolerance.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub name: String,
    pub passed: bool,
    pub lines: Vec<String>,
}

pub fn load(dir: &Path) -> Result<GoldenSet> {
    let path = dir.join(CASES_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("malformed {}", path.display()))
}

fn config_hash(case: &GoldenCase) -> String {
    let mut h = Sha256::new();
    for a in &case.args {
        h.update(a.as_bytes());
        h.update([0]);
    }
    h.update(case.seed.map(|s| s.to_string()).unwrap_or_default().as_bytes());
    hex::encode(h.finalize())
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn scratch_dir(name: &str) -> Result<PathBuf> {
    let d = std::env::temp_dir().join(format!("adaptail-golden-{}-{name}", std::process::id()));
    if d.exists() {
        std::fs::remove_dir_all(&d)?;
    }
    std::fs::create_dir_all(&d)?;
    Ok(d)
}

/// Runs a case into a scratch directory and returns the canonical artifacts.
fn run_case(dir: &Path, case: &GoldenCase, seed_offset: u64) -> Result<Vec<(String, CanonicalTable)>> {
    let out = scratch_dir(&case.name)?;
    let mut argv: Vec<String> = vec!["adaptail".into()];
    argv.extend(case.args.iter().map(|a| a.replace("{dir}", &dir.display().to_string())));
    if let Some(seed) = case.seed {
        argv.push("--seed".into());
        argv.push((seed + seed_offset).to_string());
    }
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(&argv).with_context(|| format!("case {}: bad command line", case.name))?;
    if matches!(cli.command, Command::VerifyGoldens(_) | Command::BlessGoldens(_)) {
        bail!("case {} would recurse", case.name);
    }
    let outcome: Outcome = crate::run(cli).with_context(|| format!("case {} failed to run", case.name))?;
    let mut result = Vec::new();
    for path in &outcome.artifacts {
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or_default().to_string();
        // manifests carry a timestamp and are re-derivable from the tables
        if file.ends_with("_manifest.json") {
            continue;
        }
        let text = std::fs::read_to_string(path)?;
        result.push((file.clone(), canonicalize(&file, &text).with_context(|| format!("canonicalizing {file}"))?));
    }
    std::fs::remove_dir_all(&out).ok();
    result.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(result)
}

fn stored_path(dir: &Path, case: &str, file: &str) -> PathBuf {
    dir.join(case).join(format!("{file}.canon.csv"))
}

/// Re-records every case (or only `only`) and rewrites the case file.
pub fn bless(dir: &Path, only: Option<&str>) -> Result<Vec<String>> {
    let mut set = load(dir)?;
    let mut log = Vec::new();
    for case in set.cases.iter_mut().filter(|c| only.is_none_or(|o| o == c.name)) {
        let arts = run_case(dir, case, 0)?;
        std::fs::create_dir_all(dir.join(&case.name))?;
        case.artifacts.clear();
        for (file, table) in arts {
            let text = table.to_csv()?;
            std::fs::write(stored_path(dir, &case.name, &file), &text)?;
            case.artifacts.push(GoldenArtifact { sha256: digest(&text), file });
        }
        case.config_hash = config_hash(case);
        log.push(format!("blessed {} ({} artifacts)", case.name, case.artifacts.len()));
    }
    let header = "# Golden runs. Regenerate with `adaptail bless-goldens --dir <this directory>`.\n\n";
    std::fs::write(dir.join(CASES_FILE), format!("{header}{}", toml::to_string_pretty(&set)?))?;
    Ok(log)
}

fn compare(file: &str, golden: &CanonicalTable, got: &CanonicalTable, tol: f64, lines: &mut Vec<String>) -> bool {
    if golden.header != got.header || golden.rows.len() != got.rows.len() {
        lines.push(format!(
            "{file}: shape changed (golden {} columns × {} rows, got {} × {})",
            golden.header.len(),
            golden.rows.len(),
            got.header.len(),
            got.rows.len()
        ));
        return false;
    }
    let (mut worst_abs, mut worst_rel, mut bad) = (0.0f64, 0.0f64, 0usize);
    let mut first = None;
    for (i, (g, x)) in golden.rows.iter().zip(&got.rows).enumerate() {
        for (j, (a, b)) in g.iter().zip(x).enumerate() {
            if a == b {
                continue;
            }
            let ok = match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    let d = (a - b).abs();
                    let r = d / a.abs().max(b.abs());
                    worst_abs = worst_abs.max(d);
                    worst_rel = worst_rel.max(r);
                    r <= tol
                }
                _ => false,
            };
            if !ok {
                bad += 1;
                first.get_or_insert_with(|| format!("row {} column {}: golden {a}, got {b}", i + 1, golden.header[j]));
            }
        }
    }
    if bad > 0 {
        lines.push(format!(
            "{file}: {bad} cells outside tolerance {tol:e}; max |Δ| = {worst_abs:.3e}, max relative Δ = {worst_rel:.3e}; first: {}",
            first.unwrap_or_default()
        ));
        false
    } else {
        lines.push(format!("{file}: within tolerance {tol:e} (max relative Δ = {worst_rel:.3e})"));
        true
    }
}

fn band_check(check: &BandCheck, arts: &[(String, CanonicalTable)], lines: &mut Vec<String>) -> bool {
    let Some((_, t)) = arts.iter().find(|(f, _)| *f == check.file) else {
        lines.push(format!("check on {}: artifact missing", check.file));
        return false;
    };
    let (Some(k), Some(c)) =
        (t.header.iter().position(|h| *h == check.key), t.header.iter().position(|h| *h == check.column))
    else {
        lines.push(format!("check on {}: columns {} / {} missing", check.file, check.key, check.column));
        return false;
    };
    let row = t.rows.iter().find(|r| check.key_value.matches(&r[k]));
    let Some(v) = row.and_then(|r| r[c].parse::<f64>().ok()) else {
        lines.push(format!("check on {}: no row with {} = {}", check.file, check.key, check.key_value));
        return false;
    };
    let ok = (v - check.expected).abs() <= check.band;
    lines.push(format!(
        "{} {}={} {}: {v:.6} vs reference {} ± {} {}",
        check.file,
        check.key,
        check.key_value,
        check.column,
        check.expected,
        check.band,
        if ok { "ok" } else { "OUT OF BAND" }
    ));
    ok
}

pub fn verify(dir: &Path, opts: &VerifyOptions) -> Result<Vec<CaseReport>> {
    let set = load(dir)?;
    let mut reports = Vec::new();
    let selected: Vec<&GoldenCase> =
        set.cases.iter().filter(|c| opts.only.as_ref().is_none_or(|o| *o == c.name)).collect();
    if selected.is_empty() {
        bail!("no golden case matches");
    }
    for case in selected {
        let mut lines = Vec::new();
        let mut passed = true;
        if case.artifacts.is_empty() {
            lines.push("never blessed".into());
            passed = false;
        }
        if config_hash(case) != case.config_hash {
            lines.push("command line changed since blessing".into());
            passed = false;
        }
        let tol = opts.tolerance.unwrap_or(case.tolerance);
        match run_case(dir, case, opts.seed_offset) {
            Err(e) => {
                lines.push(format!("run failed: {e:#}"));
                passed = false;
            }
            Ok(arts) => {
                let produced: Vec<&str> = arts.iter().map(|(f, _)| f.as_str()).collect();
                let expected: Vec<&str> = case.artifacts.iter().map(|a| a.file.as_str()).collect();
                if produced != expected {
                    lines.push(format!("artifact set changed: golden {expected:?}, got {produced:?}"));
                    passed = false;
                }
                for a in &case.artifacts {
                    let Some((_, got)) = arts.iter().find(|(f, _)| *f == a.file) else { continue };
                    let text = got.to_csv()?;
                    if digest(&text) == a.sha256 {
                        lines.push(format!("{}: digest matches", a.file));
                        continue;
                    }
                    let stored = std::fs::read_to_string(stored_path(dir, &case.name, &a.file))
                        .with_context(|| format!("missing stored copy of {}", a.file))?;
                    if digest(&stored) != a.sha256 {
                        lines.push(format!("{}: stored copy does not match its recorded digest", a.file));
                        passed = false;
                        continue;
                    }
                    passed &= compare(&a.file, &CanonicalTable::from_csv(&stored)?, got, tol, &mut lines);
                }
                for check in &case.checks {
                    passed &= band_check(check, &arts, &mut lines);
                }
            }
        }
        reports.push(CaseReport { name: case.name.clone(), passed, lines });
    }
    Ok(reports)
}
