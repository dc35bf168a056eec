//! Command-line front end for `adaptail`: adaptive tail estimation on data
//! files, Monte Carlo calibration and simulation studies, law diagnostics
//! and golden-file regression runs.

pub mod canonical;
pub mod commands;
pub mod goldens;
pub mod input;
pub mod settings;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub use commands::Experiment;
pub use settings::Settings;

/// Error caused by how the program was invoked; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "adaptail", version, about = "Adaptive Pareto tail estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with any of the long options; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

impl Common {
    pub fn resolve(&self) -> Result<Settings> {
        match &self.config {
            Some(path) => Ok(self.settings.clone().over(Settings::from_toml_file(path)?)),
            None => Ok(self.settings.clone()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GoldenArgs {
    /// Goldens directory
    #[arg(long, default_value = "goldens")]
    pub dir: PathBuf,
    /// Only this case
    #[arg(long)]
    pub case: Option<String>,
    /// Added to every case seed
    #[arg(long, default_value_t = 0)]
    pub seed_offset: u64,
    /// Relative tolerance overriding the recorded one
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select the tail of a data set and estimate its index and high quantiles
    Estimate(Common),
    /// Monte Carlo critical value of the test under the Pareto null
    Calibrate(Common),
    /// Run a simulation study
    Simulate {
        experiment: Experiment,
        #[command(flatten)]
        common: Common,
    },
    /// Fitted index, hazard index and χ² distance of a law on a threshold grid
    Analyze(Common),
    /// Draw a sample from a law into a data file
    Sample(Common),
    /// Re-run the recorded golden cases and report drift
    VerifyGoldens(GoldenArgs),
    /// Re-record the golden cases
    BlessGoldens(GoldenArgs),
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub summary: Vec<String>,
    /// Set when the command ran but its check did not pass.
    pub failed: bool,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Estimate(c) => commands::estimate(&c.resolve()?),
        Command::Calibrate(c) => commands::calibrate_cmd(&c.resolve()?),
        Command::Simulate { experiment, common } => commands::simulate(experiment, &common.resolve()?),
        Command::Analyze(c) => commands::analyze(&c.resolve()?),
        Command::Sample(c) => commands::sample(&c.resolve()?),
        Command::VerifyGoldens(g) => {
            let opts = goldens::VerifyOptions { only: g.case, seed_offset: g.seed_offset, tolerance: g.tolerance };
            let reports = goldens::verify(&g.dir, &opts)?;
            let mut out = Outcome::default();
            for r in &reports {
                out.summary.push(format!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name));
                out.summary.extend(r.lines.iter().map(|l| format!("    {l}")));
            }
            out.failed = reports.iter().any(|r| !r.passed);
            Ok(out)
        }
        Command::BlessGoldens(g) => {
            Ok(Outcome { summary: goldens::bless(&g.dir, g.case.as_deref())?, ..Default::default() })
        }
    }
}
