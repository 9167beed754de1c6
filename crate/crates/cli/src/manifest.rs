//! Run manifests: one JSON file per invocation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qxfer::lab::{CouplerConfig, ExperimentConfig, Range, SweepSpec};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Simulate,
    Sweep,
    Coupler,
    Fidelity,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Sweep => "sweep",
            Kind::Coupler => "coupler",
            Kind::Fidelity => "fidelity",
        }
    }
}

/// Output file names, relative to the `--out` directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    /// Fit `η_base - η` with `η_base` from the undeformed base experiment;
    /// otherwise fit `1 - η`.
    #[serde(default = "yes")]
    pub subtract_baseline: bool,
    /// Coordinates are divided by these before fitting, one per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_scale: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

fn six() -> f64 {
    6.0
}

fn hundred_one() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerJob {
    #[serde(default)]
    pub circuit: CouplerConfig,
    #[serde(rename = "freq_GHz", default = "six")]
    pub freq_ghz: f64,
    /// Explicit mutual-inductance grid, pH.
    #[serde(rename = "m_grid_pH", default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Range>,
    /// Grid uniform in `|t|` from 0 up to this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_t_max: Option<f64>,
    #[serde(default = "hundred_one")]
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityJob {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub phi_f_rad: f64,
    /// Take `η` and `φ_f` from a simulated transfer instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    /// Photon-number populations of the environment mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_populations: Option<Vec<f64>>,
    /// Input state as `[re, im]` Fock amplitudes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    /// Keep every n-th trajectory sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupler: Option<CouplerJob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityJob>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        m.check(path)?;
        Ok(m)
    }

    fn check(&self, path: &Path) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::validation(format!("{}: {msg}", path.display())));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let present = [
            ("experiment", self.experiment.is_some(), Kind::Simulate),
            ("sweep", self.sweep.is_some(), Kind::Sweep),
            ("coupler", self.coupler.is_some(), Kind::Coupler),
            ("fidelity", self.fidelity.is_some(), Kind::Fidelity),
        ];
        for (section, there, owner) in present {
            if there && owner != self.kind {
                return bad(format!(
                    "section `{section}` does not belong in a `{}` run",
                    self.kind.name()
                ));
            }
            if !there && owner == self.kind {
                return bad(format!("a `{}` run needs a `{section}` section", self.kind.name()));
            }
        }
        if self.fit.is_some() && self.kind != Kind::Sweep {
            return bad("`fit` only applies to sweeps".into());
        }
        if self.trajectory_stride == Some(0) {
            return bad("trajectory_stride must be at least 1".into());
        }
        for name in [&self.outputs.table, &self.outputs.summary].into_iter().flatten() {
            let p = Path::new(name);
            if name.is_empty() || p.components().count() != 1 || p.is_absolute() {
                return bad(format!("output name `{name}` must be a plain file name"));
            }
            if name == "manifest.json" {
                return bad("output name `manifest.json` is reserved".into());
            }
        }
        if self.outputs.table.is_some() && self.outputs.table == self.outputs.summary {
            return bad("outputs.table and outputs.summary must differ".into());
        }
        Ok(())
    }

    pub fn table_name(&self) -> String {
        self.outputs.table.clone().unwrap_or_else(|| {
            match self.kind {
                Kind::Simulate => "trajectory.csv",
                Kind::Sweep => "sweep.csv",
                Kind::Coupler => "coupler.csv",
                Kind::Fidelity => "",
            }
            .into()
        })
    }

    pub fn summary_name(&self) -> String {
        self.outputs.summary.clone().unwrap_or_else(|| {
            match self.kind {
                Kind::Simulate => "outcome.json",
                Kind::Sweep => "summary.json",
                Kind::Coupler => "",
                Kind::Fidelity => "fidelity.json",
            }
            .into()
        })
    }
}
