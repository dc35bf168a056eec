//! Adaptive estimation of Pareto-type tails.
//!
//! The tail is located by testing a single Pareto model against a
//! two-segment alternative on a growing grid of upper order statistics
//! and stopping at the first rejection. The selected threshold drives a
//! Hill-type index estimate and Weissman extrapolation for high quantiles.
//! Monte Carlo tools calibrate the critical value and reproduce the
//! simulation study.

pub mod adaptive;
pub mod calibration;
pub mod changepoint;
pub mod distributions;
pub mod divergences;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod par;
pub mod quadrature;
pub mod quantiles;
pub mod roots;

pub use adaptive::{build_grid, select, AdaptiveConfig, CriticalValue, TailSelection};
pub use calibration::{calibrate, calibrate_null, CalibrationResult};
pub use distributions::{Law, LawSpec};
pub use divergences::{Divergence, ParetoIndex};
pub use error::{Error, Result};
pub use estimators::Sample;
pub use par::Exec;
pub use quantiles::{quantile_adaptive, quantile_fixed_k};
