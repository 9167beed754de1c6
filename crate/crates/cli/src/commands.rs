use num_complex::Complex64;
use serde_json::{json, Value};

use qxfer::coupler::invert_m;
use qxfer::lab::{self, baseline_eta, fit_quadratic, io, run_sweep, summarize, Range};
use qxfer::quantum::{apply_channel, env_fidelity, process_fidelity, state_fidelity, Channel, FockVector};

use crate::error::CliError;
use crate::manifest::{CouplerJob, FidelityJob, RunManifest};
use crate::output::{json_bytes, Staged};

const DEFAULT_TRAJECTORY_ROWS: usize = 4000;

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> qxfer::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn simulate(m: &RunManifest, seed: Option<u64>) -> Result<Staged, CliError> {
    let mut cfg = m.experiment.clone().expect("checked");
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.deform.noise.seed = None;
    }
    let built = cfg.build()?;
    let (traj, out) = built.run()?;
    let stride = m
        .trajectory_stride
        .unwrap_or_else(|| traj.t.len().div_ceil(DEFAULT_TRAJECTORY_ROWS).max(1));
    let table = csv_bytes(|b| io::write_trajectory(b, &traj, stride))?;
    let p = &built.params;
    let l = &out.ledger;
    let summary = json!({
        "eta": out.eta,
        "one_minus_eta": 1.0 - out.eta,
        "phi_f_rad": out.phi_f,
        "protocol": {
            "tau_e_ns": p.tau_e,
            "tau_r_ns": p.tau_r,
            "t_m_e_ns": p.t_m_e,
            "t_m_r_ns": p.t_m_r,
            "t_f_ns": p.t_f,
            "eta_design": p.eta_design,
        },
        "energy": {
            "residual_emitter": l.residual_emitter,
            "received": l.received,
            "reflected": l.reflected,
            "dissipated": l.dissipated,
        },
        "warnings": out.warnings,
        "seed": cfg.seed,
    });
    let mut staged = Staged::default();
    staged.add(m.table_name(), table);
    staged.add(m.summary_name(), json_bytes(&summary));
    Ok(staged)
}

pub fn sweep(m: &RunManifest, seed: Option<u64>) -> Result<Staged, CliError> {
    let mut spec = m.sweep.clone().expect("checked");
    if let Some(s) = seed {
        spec.master_seed = s;
    }
    spec.validate()?;
    let table = run_sweep(&spec)?;
    let points = summarize(&table);

    let mut summary = json!({
        "columns": table.columns,
        "master_seed": spec.master_seed,
        "realizations": spec.realizations,
        "points": points,
        "failed_rows": table.rows.iter().filter(|r| r.error.is_some()).count(),
    });
    if let Some(req) = &m.fit {
        let base = if req.subtract_baseline {
            baseline_eta(&spec.base)?
        } else {
            1.0
        };
        let used: Vec<_> = points.iter().filter(|p| p.failures == 0 && p.n > 0).collect();
        let scale = req
            .coordinate_scale
            .clone()
            .unwrap_or_else(|| vec![1.0; table.columns.len()]);
        if scale.len() != table.columns.len() || scale.iter().any(|s| !(s.is_finite() && *s != 0.0)) {
            return Err(CliError::validation(
                "fit.coordinate_scale needs one finite non-zero entry per axis",
            ));
        }
        let xs: Vec<Vec<f64>> = used
            .iter()
            .map(|p| p.coords.iter().zip(&scale).map(|(c, s)| c / s).collect())
            .collect();
        let ys: Vec<f64> = used.iter().map(|p| base - p.mean_eta).collect();
        let fit = fit_quadratic(&xs, &ys)?;
        summary["baseline_eta"] = json!(base);
        summary["fit"] = serde_json::to_value(&fit).expect("serializable");
    }
    let bytes = csv_bytes(|b| io::write_sweep(b, &table))?;
    let mut staged = Staged::default();
    staged.add(m.table_name(), bytes);
    staged.add(m.summary_name(), json_bytes(&summary));
    Ok(staged)
}

fn linspace(r: &Range) -> Vec<f64> {
    (0..r.count)
        .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.count - 1) as f64)
        .collect()
}

/// `start:stop:count`
pub fn parse_grid(s: &str) -> Result<Range, CliError> {
    let bad = || CliError::validation(format!("--m-grid `{s}`: expected start:stop:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(Range {
        start: parts[0].trim().parse().map_err(|_| bad())?,
        stop: parts[1].trim().parse().map_err(|_| bad())?,
        count: parts[2].trim().parse().map_err(|_| bad())?,
    })
}

fn coupler_grid(job: &CouplerJob, params: &qxfer::CouplerParamsF64) -> Result<Vec<f64>, CliError> {
    match (&job.m_grid, job.abs_t_max) {
        (Some(r), None) => {
            if r.count < 2 || !(r.start.is_finite() && r.stop.is_finite()) {
                return Err(CliError::validation("m_grid_pH needs finite ends and count >= 2"));
            }
            Ok(linspace(r))
        }
        (None, Some(t_max)) => {
            if job.count < 2 || !(t_max > 0.0) {
                return Err(CliError::validation("abs_t_max must be positive and count >= 2"));
            }
            let ts = linspace(&Range {
                start: 0.0,
                stop: t_max,
                count: job.count,
            });
            ts.iter()
                .map(|&t| {
                    if t == 0.0 {
                        Ok(0.0)
                    } else {
                        invert_m(params, t).map_err(CliError::from)
                    }
                })
                .collect()
        }
        _ => Err(CliError::validation(
            "coupler needs exactly one of `m_grid_pH` and `abs_t_max`",
        )),
    }
}

pub fn coupler(m: &RunManifest, grid: Option<Range>) -> Result<Staged, CliError> {
    let mut job = m.coupler.clone().expect("checked");
    if let Some(g) = grid {
        job.m_grid = Some(g);
        job.abs_t_max = None;
    }
    let params = job.circuit.params(job.freq_ghz);
    params.validate()?;
    let ms = coupler_grid(&job, &params)?;
    let rows = lab::io::coupler_table(&params, &ms)?;
    let mut staged = Staged::default();
    staged.add(m.table_name(), csv_bytes(|b| io::write_coupler(b, &rows))?);
    Ok(staged)
}

pub fn fidelity(m: &RunManifest, seed: Option<u64>) -> Result<Staged, CliError> {
    let job: FidelityJob = m.fidelity.clone().expect("checked");
    let (eta, phi) = match (job.eta, &job.experiment) {
        (Some(eta), None) => (eta, job.phi_f_rad),
        (None, Some(cfg)) => {
            let mut cfg = cfg.clone();
            if let Some(s) = seed {
                cfg.seed = s;
                cfg.deform.noise.seed = None;
            }
            let (_, out) = cfg.build()?.run()?;
            (out.eta, out.phi_f)
        }
        _ => {
            return Err(CliError::validation(
                "fidelity needs exactly one of `eta` and `experiment`",
            ))
        }
    };
    let channel = Channel::new(eta, phi)?;
    let mut result = json!({
        "eta": eta,
        "phi_f_rad": phi,
        "process": process_fidelity(&channel),
    });
    if let Some(pops) = &job.env_populations {
        let env = env_fidelity(eta, pops)?;
        result["environment"] = json!({
            "average": env.average,
            "coefficients": env.coefficients,
        });
    }
    if let Some(amps) = &job.state {
        let psi = FockVector::new(amps.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())?;
        let rho = apply_channel(&psi, &channel, None)?;
        result["state"] = json!({
            "fidelity": state_fidelity(&psi, &rho)?,
            "output": rho.to_json(),
        });
    }
    let mut staged = Staged::default();
    staged.add(m.summary_name(), json_bytes(&result));
    Ok(staged)
}

pub fn resolved_manifest(m: &RunManifest, seed: Option<u64>, files: &[String]) -> Value {
    let mut v = serde_json::to_value(m).expect("serializable");
    if let Some(s) = seed {
        v["seed"] = json!(s);
    }
    v["written"] = json!(files);
    v
}
