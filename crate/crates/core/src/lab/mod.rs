//! Experiment harness: JSON configurations, parameter sweeps with
//! Monte-Carlo averaging, quadratic fits and table export. `f64` only.

mod config;
mod fit;
pub mod io;
mod sweep;

pub use config::{
    noise_oracle, BuiltExperiment, CouplerConfig, CouplerDrive, DeformConfig, DelayConfigJson, ExperimentConfig,
    NoiseConfig, NoiseKindConfig,
};
pub use fit::{fit_proportional, fit_quadratic, FitResult};
pub use sweep::{run_sweep, set_path, summarize, Axis, Override, PointSummary, Range, SweepRow, SweepSpec, SweepTable};

use crate::error::Result;

/// Simulated efficiency of the experiment with its pulse imperfections removed.
pub fn baseline_eta(config: &ExperimentConfig) -> Result<f64> {
    Ok(config.undeformed().build()?.run()?.1.eta)
}

/// Added inefficiency `η_base - η` for each summarized point.
pub fn added_inefficiency(summary: &[PointSummary], baseline: f64) -> Vec<f64> {
    summary.iter().map(|s| baseline - s.mean_eta).collect()
}
