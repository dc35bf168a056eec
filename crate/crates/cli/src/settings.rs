//! Run settings: command-line flags layered over an optional TOML file
//! layered over built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use adaptail::adaptive::{DEFAULT_DELTA, DEFAULT_GRID_LEN, DEFAULT_K0_FRACTION, DEFAULT_RHO, DEFAULT_Z};
use adaptail::{AdaptiveConfig, CalibrationResult, CriticalValue, Exec, Law, LawSpec};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::UsageError;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_REPS: usize = 2000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_LEVEL: f64 = 0.99;
pub const DEFAULT_ESTIMATE_P: [f64; 3] = [0.99, 0.999, 0.9999];

/// Critical value as typed by the user: a number, or `mu=<μ>` for `μ log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZText", into = "String")]
pub struct ZArg(pub CriticalValue);

#[derive(Deserialize)]
#[serde(untagged)]
enum ZText {
    Num(f64),
    Text(String),
}

impl TryFrom<ZText> for ZArg {
    type Error = String;
    fn try_from(v: ZText) -> std::result::Result<Self, String> {
        match v {
            ZText::Num(z) => Ok(ZArg(CriticalValue::Fixed(z))),
            ZText::Text(s) => s.parse(),
        }
    }
}

impl From<ZArg> for String {
    fn from(z: ZArg) -> String {
        match z.0 {
            CriticalValue::Fixed(v) => v.to_string(),
            CriticalValue::MuLogN(mu) => format!("mu={mu}"),
        }
    }
}

impl FromStr for ZArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(mu) = s.strip_prefix("mu=") {
            let mu: f64 = mu.parse().map_err(|_| format!("`{s}`: μ must be a number"))?;
            return Ok(ZArg(CriticalValue::MuLogN(mu)));
        }
        s.parse()
            .map(|z| ZArg(CriticalValue::Fixed(z)))
            .map_err(|_| format!("`{s}` is neither a number nor mu=<value>"))
    }
}

/// Every option shared by the subcommands. All fields are optional so that
/// flags and config files can be merged field by field.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Data file, one positive observation per line
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Law, e.g. `cauchy`, `pareto:theta=2`, `hall`, `gpd:xi=1`
    #[arg(long)]
    pub law: Option<String>,
    /// Sample size for calibrate, simulate and sample
    #[arg(long)]
    pub n: Option<usize>,
    /// Lower window fraction ρ
    #[arg(long)]
    pub rho: Option<f64>,
    /// Upper window trim δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Starting grid index as a fraction of n
    #[arg(long = "k0-frac")]
    pub k0_frac: Option<f64>,
    /// Grid length K_n
    #[arg(long)]
    pub grid: Option<usize>,
    /// Critical value: a number, or mu=<μ> for μ·log n
    #[arg(long)]
    pub z: Option<ZArg>,
    /// Take the critical value from a calibration JSON file
    #[arg(long)]
    pub calibration_file: Option<PathBuf>,
    /// Probability levels, comma separated
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Calibration level
    #[arg(long)]
    pub level: Option<f64>,
    /// Monte Carlo replications
    #[arg(long)]
    pub reps: Option<usize>,
    /// Monte Carlo or sampling seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (1 runs sequentially)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Smallest threshold of the analyze grid
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Largest threshold of the analyze grid
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of analyze grid points
    #[arg(long)]
    pub points: Option<usize>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Settings { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Settings {
    /// `self` wins over `lower` field by field.
    pub fn over(self, lower: Settings) -> Settings {
        layer!(self, lower; input, law, n, rho, delta, k0_frac, grid, z, calibration_file, p, level, reps, seed,
            workers, out, t_min, t_max, points)
    }

    /// Reads a TOML config; relative paths in it are taken relative to the file.
    pub fn from_toml_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut s: Settings =
            toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut s.input, &mut s.calibration_file, &mut s.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }

    pub fn law(&self) -> Result<Law> {
        let text = self.law.as_deref().ok_or_else(|| UsageError("this command needs --law".into()))?;
        let spec: LawSpec = text.parse().map_err(|e| UsageError(format!("{e}")))?;
        Ok(Law::new(spec)?)
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(dir)
    }

    pub fn exec(&self) -> Exec {
        Exec::with_workers(self.workers)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or(DEFAULT_REPS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn level(&self) -> Result<f64> {
        let l = self.level.unwrap_or(DEFAULT_LEVEL);
        if !(l > 0.0 && l < 1.0) {
            bail!(UsageError(format!("--level must lie in (0, 1), got {l}")));
        }
        Ok(l)
    }

    pub fn p_levels(&self, default: &[f64]) -> Result<Vec<f64>> {
        let p = self.p.clone().unwrap_or_else(|| default.to_vec());
        if let Some(bad) = p.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            bail!(UsageError(format!("probability levels must lie in (0, 1), got {bad}")));
        }
        Ok(p)
    }

    /// Adaptive configuration for sample size `n`. The critical value comes
    /// from `--z`, else the calibration file, else the default.
    pub fn adaptive(&self, n: usize, warnings: &mut Vec<String>) -> Result<AdaptiveConfig> {
        let calibrated = match &self.calibration_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read calibration file {}", path.display()))?;
                let c: CalibrationResult = serde_json::from_str(&text)
                    .with_context(|| format!("{} is not a calibration result", path.display()))?;
                if c.n != n {
                    warnings.push(format!("calibration was run for n = {} but the sample has n = {n}", c.n));
                }
                if c.low_precision() {
                    warnings.push(format!("calibration file uses only {} replications", c.n_rep));
                }
                Some(c)
            }
            None => None,
        };
        let cv = match (self.z, &calibrated) {
            (Some(z), _) => z.0,
            (None, Some(c)) => CriticalValue::Fixed(c.z),
            (None, None) => CriticalValue::Fixed(DEFAULT_Z),
        };
        let rho = self.rho.or(calibrated.as_ref().map(|c| c.config.rho)).unwrap_or(DEFAULT_RHO);
        let delta = self.delta.or(calibrated.as_ref().map(|c| c.config.delta)).unwrap_or(DEFAULT_DELTA);
        let grid = self.grid.unwrap_or(DEFAULT_GRID_LEN.min(n));
        let cfg =
            AdaptiveConfig::with_k0_fraction(n, rho, delta, self.k0_frac.unwrap_or(DEFAULT_K0_FRACTION), grid, cv)?;
        if let Some(c) = &calibrated {
            if (c.config.rho, c.config.delta, c.config.k0, c.config.grid_len)
                != (cfg.rho, cfg.delta, cfg.k0, cfg.grid_len)
            {
                warnings.push("grid differs from the one used for calibration".into());
            }
        }
        Ok(cfg)
    }
}
