use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::{ExperimentConfig, NoiseKindConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// One sweep dimension. `paths` ties several parameters to the same value,
/// each multiplied by the matching entry of `scales`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logspace: Option<Range>,
    /// Column name in the output table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Axis {
    pub fn values(path: &str, values: Vec<f64>) -> Self {
        Self {
            path: Some(path.into()),
            values: Some(values),
            ..Self::default()
        }
    }

    pub fn tied(paths: &[&str], scales: &[f64], values: Vec<f64>) -> Self {
        Self {
            paths: paths.iter().map(|s| s.to_string()).collect(),
            scales: Some(scales.to_vec()),
            values: Some(values),
            ..Self::default()
        }
    }

    fn targets(&self) -> Result<Vec<(String, f64)>> {
        let paths: Vec<String> = match (&self.path, self.paths.is_empty()) {
            (Some(p), true) => vec![p.clone()],
            (None, false) => self.paths.clone(),
            _ => return Err(Error::Sweep("axis needs exactly one of `path` and `paths`".into())),
        };
        let scales = self.scales.clone().unwrap_or_else(|| vec![1.0; paths.len()]);
        if scales.len() != paths.len() {
            return Err(Error::Sweep("`scales` must match `paths` in length".into()));
        }
        Ok(paths.into_iter().zip(scales).collect())
    }

    fn grid(&self) -> Result<Vec<f64>> {
        let v = match (&self.values, &self.linspace, &self.logspace) {
            (Some(v), None, None) => v.clone(),
            (None, Some(r), None) => {
                if r.count < 2 {
                    return Err(Error::Sweep("linspace needs count >= 2".into()));
                }
                (0..r.count)
                    .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.count - 1) as f64)
                    .collect()
            }
            (None, None, Some(r)) => {
                if r.count < 2 || !(r.start > 0.0 && r.stop > 0.0) {
                    return Err(Error::Sweep("logspace needs count >= 2 and positive ends".into()));
                }
                let (a, b) = (r.start.ln(), r.stop.ln());
                (0..r.count)
                    .map(|k| (a + (b - a) * k as f64 / (r.count - 1) as f64).exp())
                    .collect()
            }
            _ => {
                return Err(Error::Sweep(
                    "axis needs exactly one of `values`, `linspace`, `logspace`".into(),
                ))
            }
        };
        if v.len() < 2 {
            return Err(Error::Sweep("each axis needs at least two values".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Sweep("axis values must be finite".into()));
        }
        Ok(v)
    }
}

/// Extra settings applied to one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub point: usize,
    pub set: Map<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub overrides: Vec<Override>,
    #[serde(default)]
    pub master_seed: u64,
    /// Runs per noisy point.
    #[serde(default = "one_usize")]
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: usize,
    pub realization: usize,
    pub coords: Vec<f64>,
    pub seed: u64,
    pub eta: Option<f64>,
    pub phi_f: Option<f64>,
    pub t_f: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSummary {
    pub point: usize,
    pub coords: Vec<f64>,
    pub n: usize,
    pub mean_eta: f64,
    pub std_eta: f64,
    pub sem_eta: f64,
    pub failures: usize,
}

/// Sets a dotted path inside a JSON object, creating objects over nulls.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Sweep(format!("`{path}`: `{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Err(Error::Sweep("empty path".into()))
}

/// Scaled targets and grid values of one axis.
type PlanAxis = (Vec<(String, f64)>, Vec<f64>);

struct Plan {
    base: Value,
    axes: Vec<PlanAxis>,
    columns: Vec<String>,
    n_points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    fn plan(&self) -> Result<Plan> {
        if self.axes.is_empty() {
            return Err(Error::Sweep("at least one axis is required".into()));
        }
        if self.realizations < 1 {
            return Err(Error::Sweep("realizations must be at least 1".into()));
        }
        let mut axes = Vec::new();
        let mut n_points = 1usize;
        for a in &self.axes {
            let t = a.targets()?;
            let g = a.grid()?;
            n_points = n_points
                .checked_mul(g.len())
                .ok_or_else(|| Error::Sweep("grid too large".into()))?;
            axes.push((t, g));
        }
        let mut columns: Vec<String> = self
            .axes
            .iter()
            .zip(&axes)
            .map(|(a, (t, _))| {
                a.name
                    .clone()
                    .unwrap_or_else(|| t[0].0.rsplit('.').next().unwrap_or(&t[0].0).to_string())
            })
            .collect();
        for i in 0..columns.len() {
            if columns.iter().filter(|c| **c == columns[i]).count() > 1 && self.axes[i].name.is_none() {
                columns[i] = axes[i].0[0].0.clone();
            }
        }
        for o in &self.overrides {
            if o.point >= n_points {
                return Err(Error::Sweep(format!(
                    "override for point {} beyond {} points",
                    o.point, n_points
                )));
            }
        }
        let base = serde_json::to_value(&self.base)?;
        let plan = Plan {
            base,
            axes,
            columns,
            n_points,
        };
        // a typo in a path shows up when the first point is decoded
        let probe = plan.config(0, &self.overrides)?;
        serde_json::from_value::<ExperimentConfig>(probe)
            .map_err(|e| Error::Sweep(format!("grid point 0 does not decode: {e}")))?;
        Ok(plan)
    }

    /// Number of grid points, not counting realizations.
    pub fn points(&self) -> Result<usize> {
        Ok(self.plan()?.n_points)
    }
}

impl Plan {
    fn coords(&self, point: usize) -> Vec<f64> {
        let mut idx = point;
        let mut out = vec![0.0; self.axes.len()];
        for (k, (_, g)) in self.axes.iter().enumerate().rev() {
            out[k] = g[idx % g.len()];
            idx /= g.len();
        }
        out
    }

    fn config(&self, point: usize, overrides: &[Override]) -> Result<Value> {
        let mut v = self.base.clone();
        for ((targets, _), x) in self.axes.iter().zip(self.coords(point)) {
            for (path, s) in targets {
                set_path(&mut v, path, serde_json::json!(x * s))?;
            }
        }
        for o in overrides.iter().filter(|o| o.point == point) {
            for (path, val) in &o.set {
                set_path(&mut v, path, val.clone())?;
            }
        }
        Ok(v)
    }
}

fn run_one(value: Value, seed: u64) -> (Option<(f64, f64, f64)>, Option<String>) {
    let result = serde_json::from_value::<ExperimentConfig>(value)
        .map_err(Error::from)
        .and_then(|mut c| {
            c.seed = seed;
            c.deform.noise.seed = None;
            let b = c.build()?;
            let t_f = b.params.t_f;
            let (_, o) = b.run()?;
            Ok((o.eta, o.phi_f, t_f))
        });
    match result {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Evaluates every grid point (and realization) in parallel; rows come back
/// in grid order, last axis fastest.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let plan = spec.plan()?;
    let mut jobs = Vec::new();
    for point in 0..plan.n_points {
        let value = plan.config(point, &spec.overrides)?;
        let noisy = serde_json::from_value::<ExperimentConfig>(value.clone())
            .map(|c| c.deform.noise.kind != NoiseKindConfig::None && c.deform.noise.amplitude != 0.0)
            .unwrap_or(false);
        let reps = if noisy { spec.realizations } else { 1 };
        for r in 0..reps {
            jobs.push((point, r, value.clone()));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(point, realization, value)| {
            let seed = derive_seed(spec.master_seed, &[point as u64, realization as u64]);
            let (res, error) = run_one(value, seed);
            SweepRow {
                point,
                realization,
                coords: plan.coords(point),
                seed,
                eta: res.map(|r| r.0),
                phi_f: res.map(|r| r.1),
                t_f: res.map(|r| r.2),
                error,
            }
        })
        .collect();
    Ok(SweepTable {
        columns: plan.columns,
        rows,
    })
}

/// Mean, standard deviation and standard error of η per grid point.
pub fn summarize(table: &SweepTable) -> Vec<PointSummary> {
    let mut out: Vec<PointSummary> = Vec::new();
    let mut start = 0;
    while start < table.rows.len() {
        let point = table.rows[start].point;
        let end = start + table.rows[start..].iter().take_while(|r| r.point == point).count();
        let group = &table.rows[start..end];
        let etas: Vec<f64> = group.iter().filter_map(|r| r.eta).collect();
        let n = etas.len();
        let mean = if n > 0 {
            etas.iter().sum::<f64>() / n as f64
        } else {
            f64::NAN
        };
        let std = if n > 1 {
            (etas.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        out.push(PointSummary {
            point,
            coords: group[0].coords.clone(),
            n,
            mean_eta: mean,
            std_eta: std,
            sem_eta: if n > 0 { std / (n as f64).sqrt() } else { f64::NAN },
            failures: group.len() - n,
        });
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SweepSpec {
        SweepSpec {
            base: ExperimentConfig::symmetric(0.05, 0.99),
            axes: vec![
                Axis::values("deform.t_max_e_rel", vec![-0.05, 0.0, 0.05]),
                Axis::values("deform.alpha_r", vec![0.0, 0.1]),
            ],
            overrides: vec![],
            master_seed: 7,
            realizations: 3,
        }
    }

    #[test]
    fn grid_order_and_columns() {
        let t = run_sweep(&spec()).unwrap();
        assert_eq!(t.columns, vec!["t_max_e_rel", "alpha_r"]);
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.rows[1].coords, vec![-0.05, 0.1]);
        assert_eq!(t.rows[2].coords, vec![0.0, 0.0]);
        assert!(t.rows.iter().all(|r| r.eta.is_some()));
    }

    #[test]
    fn errors_stay_in_rows() {
        let mut s = spec();
        s.axes[1] = Axis::values("deform.sigma_ns", vec![0.0, 1e6]);
        let t = run_sweep(&s).unwrap();
        assert!(t.rows[1].error.is_some());
        assert!(t.rows[0].error.is_none());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec();
        s.axes.clear();
        assert!(s.validate().is_err());
        let mut s = spec();
        s.axes[0] = Axis::values("deform.no_such_field", vec![0.0, 1.0]);
        assert!(s.validate().is_err());
        let mut s = spec();
        s.axes[0] = Axis::values("deform.alpha_e", vec![0.0]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn noisy_points_repeat() {
        let mut s = spec();
        s.base.deform.noise.kind = NoiseKindConfig::Multiplicative;
        s.base.deform.noise.amplitude = 0.05;
        s.axes = vec![Axis::values("deform.noise.dt_grid_ns", vec![1.0, 2.0])];
        let t = run_sweep(&s).unwrap();
        assert_eq!(t.rows.len(), 6);
        let sm = summarize(&t);
        assert_eq!(sm.len(), 2);
        assert_eq!(sm[0].n, 3);
        assert!(sm[0].sem_eta > 0.0);
        assert_ne!(t.rows[0].eta, t.rows[1].eta);
    }
}
