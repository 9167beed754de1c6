//! Plot-ready CSV tables. Numbers use the shortest representation that
//! round-trips to the same `f64`.

use std::io::Write;

use crate::coupler::{amplitudes, CouplerParams};
use crate::dynamics::FieldTrajectory;
use crate::error::Result;
use crate::pulse::PulseShape;

use super::sweep::SweepTable;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// `t_ns, re_te, im_te, re_tr, im_tr` on `n + 1` equally spaced times.
pub fn write_shapes<W: Write>(w: W, emitter: &PulseShape<f64>, receiver: &PulseShape<f64>, n: usize) -> Result<()> {
    let mut out = writer(w, &["t_ns", "re_te", "im_te", "re_tr", "im_tr"])?;
    let t_f = emitter.duration();
    let n = n.max(1);
    for k in 0..=n {
        let t = t_f * k as f64 / n as f64;
        let (e, r) = (emitter.eval(t), receiver.eval(t));
        out.write_record([num(t), num(e.re), num(e.im), num(r.re), num(r.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per stored time, every `stride`-th sample plus the last one.
pub fn write_trajectory<W: Write>(w: W, traj: &FieldTrajectory<f64>, stride: usize) -> Result<()> {
    let mut out = writer(
        w,
        &["t_ns", "re_G", "im_G", "re_B", "im_B", "re_A", "im_A", "re_F", "im_F"],
    )?;
    let n = traj.t.len();
    let stride = stride.max(1);
    for k in (0..n).filter(|&k| k % stride == 0 || k + 1 == n) {
        let (g, b, a, f) = (traj.g[k], traj.b[k], traj.a[k], traj.f[k]);
        out.write_record([
            num(traj.t[k]),
            num(g.re),
            num(g.im),
            num(b.re),
            num(b.im),
            num(a.re),
            num(a.im),
            num(f.re),
            num(f.im),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Coupler response on an `M` grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplerRow {
    pub m: f64,
    pub abs_t: f64,
    pub arg_t: f64,
    /// Phase of `r_in` relative to zero coupling, rad.
    pub arg_rin: f64,
    pub delta_omega_mhz: f64,
}

pub fn coupler_table(params: &CouplerParams<f64>, m_grid: &[f64]) -> Result<Vec<CouplerRow>> {
    let r0 = amplitudes(params, 0.0)?.r_in;
    m_grid
        .iter()
        .map(|&m| {
            let p = amplitudes(params, m)?;
            Ok(CouplerRow {
                m,
                abs_t: p.t.norm(),
                arg_t: if p.t.norm() > 0.0 { p.t.arg() } else { 0.0 },
                arg_rin: (p.r_in / r0).arg(),
                delta_omega_mhz: p.delta_omega / (2.0 * std::f64::consts::PI) * 1e3,
            })
        })
        .collect()
}

pub fn write_coupler<W: Write>(w: W, rows: &[CouplerRow]) -> Result<()> {
    let mut out = writer(w, &["M_pH", "abs_t", "arg_t", "arg_rin", "delta_omega_MHz"])?;
    for r in rows {
        out.write_record([
            num(r.m),
            num(r.abs_t),
            num(r.arg_t),
            num(r.arg_rin),
            num(r.delta_omega_mhz),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Axis columns, then `point, realization, seed, eta, one_minus_eta, phi_f_rad, t_f_ns, error`.
pub fn write_sweep<W: Write>(w: W, table: &SweepTable) -> Result<()> {
    let mut header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    header.extend([
        "point",
        "realization",
        "seed",
        "eta",
        "one_minus_eta",
        "phi_f_rad",
        "t_f_ns",
        "error",
    ]);
    let mut out = writer(w, &header)?;
    for r in &table.rows {
        let mut rec: Vec<String> = r.coords.iter().copied().map(num).collect();
        rec.extend([
            r.point.to_string(),
            r.realization.to_string(),
            r.seed.to_string(),
            opt(r.eta),
            opt(r.eta.map(|e| 1.0 - e)),
            opt(r.phi_f),
            opt(r.t_f),
            r.error.clone().unwrap_or_default(),
        ]);
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
